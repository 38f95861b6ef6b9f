#pragma once

#include "causalvc/error.hpp"
#include "causalvc/rng.hpp"
#include "causalvc/core.hpp"
#include "causalvc/graph.hpp"
#include "causalvc/models.hpp"
#include "causalvc/synthgen.hpp"
#include "causalvc/stattests.hpp"
#include "causalvc/learners.hpp"
#include "causalvc/bounds.hpp"
#include "causalvc/harness.hpp"
#include "causalvc/io.hpp"
