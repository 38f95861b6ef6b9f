// Prints how many CI tests the polytree bound asks for against how many exist.
#include <cstdio>

#include "causalvc/bounds.hpp"

using namespace causalvc;

int main() {
  const double eps = 0.1, eta = 0.1;
  std::printf("%6s %12s %12s %10s\n", "n", "min_k", "possible", "fraction");
  for (int n : {10, 20, 50, 100, 200, 300, 500}) {
    const auto k = min_training_sets(ModelClass::Polytrees, n, eps, eta);
    const auto all = count_queries(n, QueryKind::CondIndep, 1);
    std::printf("%6d %12llu %12llu %10.4f\n", n, static_cast<unsigned long long>(k),
                static_cast<unsigned long long>(all), static_cast<double>(k) / static_cast<double>(all));
  }
}
