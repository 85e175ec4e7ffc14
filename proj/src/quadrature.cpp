#include "treeweyl/quadrature.hpp"

namespace treeweyl {

namespace {

// W[k-1][i] = int_0^k l_i(s) ds for the 6 Lagrange basis polynomials on
// nodes s = 0..5. Row k=4 is Boole's rule, k=5 the closed 6-point rule.
constexpr double kCumWeights[5][6] = {
    {95.0 / 288.0, 1427.0 / 1440.0, -133.0 / 240.0, 241.0 / 720.0, -173.0 / 1440.0, 3.0 / 160.0},
    {14.0 / 45.0, 43.0 / 30.0, 7.0 / 45.0, 7.0 / 45.0, -1.0 / 15.0, 1.0 / 90.0},
    {51.0 / 160.0, 219.0 / 160.0, 57.0 / 80.0, 57.0 / 80.0, -21.0 / 160.0, 3.0 / 160.0},
    {14.0 / 45.0, 64.0 / 45.0, 8.0 / 15.0, 64.0 / 45.0, 14.0 / 45.0, 0.0},
    {95.0 / 288.0, 125.0 / 96.0, 125.0 / 144.0, 125.0 / 144.0, 125.0 / 96.0, 95.0 / 288.0},
};

}  // namespace

template <class T>
std::vector<T> cumulative_integral(const std::vector<T>& y, double h) {
  const size_t n = y.size();
  require(n >= 6 && (n - 1) % 5 == 0, "BadGrid",
          "cumulative_integral: grid size must be 5k+1, got " + std::to_string(n));
  std::vector<T> out(n);
  out[0] = T{};
  for (size_t p = 0; p + 5 < n; p += 5) {
    for (int k = 1; k <= 5; ++k) {
      T acc{};
      for (int i = 0; i < 6; ++i) acc += kCumWeights[k - 1][i] * y[p + i];
      out[p + k] = out[p] + h * acc;
    }
  }
  return out;
}

template std::vector<double> cumulative_integral(const std::vector<double>&, double);
template std::vector<cplx> cumulative_integral(const std::vector<cplx>&, double);

}  // namespace treeweyl
