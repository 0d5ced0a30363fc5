#pragma once

#include <Eigen/Dense>

namespace hypodiff {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point (t, x) of space-time.
struct SpaceTimePoint {
  double t = 0.0;
  Vector x;
};

}  // namespace hypodiff
