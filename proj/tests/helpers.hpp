#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "taylor/problem.hpp"
#include "taylor/slope_oracle.hpp"

namespace testing_util {

using taylor::Box;
using taylor::GridFunction;
using taylor::Vector;
using taylor::vec;

inline GridFunction grid1d(const std::function<double(double)>& f, double lo, double hi, double h) {
  return GridFunction::sample([f](const Vector& x) { return f(x[0]); }, Box(vec({lo}), vec({hi})), h);
}

inline std::vector<double> theta_grid() {
  std::vector<double> t;
  for (int i = 1; i < 20; ++i) t.push_back(0.05 * i);
  return t;
}

inline double approx_rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace testing_util
