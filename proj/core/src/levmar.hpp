#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>

namespace qcns {

// Compact Levenberg-Marquardt with numeric Jacobian and box constraints.
// Sized for the few-parameter model fits in this project; cost is the sum of
// squared residuals.
struct LevMarResult {
    Eigen::VectorXd x;
    double cost = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
    Eigen::MatrixXd jtj;  // J^T J at the solution
    int n_residuals = 0;

    // Parameter covariance, curvature scaled by residual variance.
    Eigen::MatrixXd covariance() const;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

LevMarResult levmar(const ResidualFn& residuals, Eigen::VectorXd x0,
                    const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                    int max_iter = 200);

// Unbounded convenience overload.
LevMarResult levmar(const ResidualFn& residuals, Eigen::VectorXd x0, int max_iter = 200);

}  // namespace qcns
