#pragma once

#include <Eigen/Dense>

namespace swdpwr {

/// [A^{-1}]_{ii} for a symmetric positive-definite information matrix A.
/// Throws E-SINGULAR when A is not positive definite or its reciprocal
/// condition number falls below 1e-12.
double inverse_diagonal_entry(const Eigen::MatrixXd& information, Eigen::Index index);

/// Full inverse under the same checks.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& information);

}  // namespace swdpwr
