#pragma once

#include <Eigen/Dense>

namespace layerlq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace layerlq
