#pragma once

#include <vector>

#include "treeweyl/common.hpp"

namespace treeweyl {

// Grid sizes for the coefficient recurrences must satisfy (G-1) % 5 == 0 so
// that the composite 6-point Newton-Cotes panels tile the grid exactly.
inline int round_grid_size(int g) {
  int panels = (g - 1 + 4) / 5;
  if (panels < 13) panels = 13;  // G >= 66 keeps the spec minimum G >= 64
  return 5 * panels + 1;
}

// Cumulative integral of uniformly spaced samples: out[j] = int_{x0}^{xj} y.
// Composite 6-point Newton-Cotes; values at panel-interior nodes come from the
// per-panel quintic integrated up to that node. Requires (y.size()-1) % 5 == 0.
template <class T>
std::vector<T> cumulative_integral(const std::vector<T>& y, double h);

template <class T>
T integral(const std::vector<T>& y, double h) {
  return cumulative_integral(y, h).back();
}

extern template std::vector<double> cumulative_integral(const std::vector<double>&, double);
extern template std::vector<cplx> cumulative_integral(const std::vector<cplx>&, double);

}  // namespace treeweyl
