#include "swdpwr/linalg.hpp"

#include "swdpwr/error.hpp"

namespace swdpwr {
namespace {

constexpr double kMinReciprocalCondition = 1e-12;

Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::MatrixXd& a) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success || !(llt.rcond() >= kMinReciprocalCondition))
        throw Error(codes::kSingular,
                    "The information matrix is singular; the treatment effect is not estimable "
                    "under this design.");
    return llt;
}

}  // namespace

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& information) {
    const Eigen::VectorXd scale = information.diagonal().cwiseMax(0.0).cwiseSqrt();
    if ((scale.array() <= 0.0).any())
        throw Error(codes::kSingular,
                    "The information matrix is singular; a parameter carries no information.");
    // Equilibrated so the condition test ignores the scale of each coordinate.
    const Eigen::VectorXd inv_scale = scale.cwiseInverse();
    const Eigen::MatrixXd scaled = inv_scale.asDiagonal() * information * inv_scale.asDiagonal();
    const auto llt = factor(scaled);
    const Eigen::MatrixXd inv =
        llt.solve(Eigen::MatrixXd::Identity(information.rows(), information.cols()));
    return inv_scale.asDiagonal() * inv * inv_scale.asDiagonal();
}

double inverse_diagonal_entry(const Eigen::MatrixXd& information, Eigen::Index index) {
    return spd_inverse(information)(index, index);
}

}  // namespace swdpwr
