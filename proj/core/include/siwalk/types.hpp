#pragma once

#include <Eigen/Dense>

namespace siwalk {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace siwalk
