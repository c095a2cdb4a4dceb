#include "levmar.hpp"

#include <algorithm>
#include <cmath>

namespace qcns {

Eigen::MatrixXd LevMarResult::covariance() const {
    const int p = static_cast<int>(x.size());
    const int dof = std::max(n_residuals - p, 1);
    const double s2 = cost / static_cast<double>(dof);
    Eigen::MatrixXd inv = jtj.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    return inv * s2;
}

namespace {

Eigen::VectorXd clamp_to_box(Eigen::VectorXd x, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi) {
    for (int i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
    return x;
}

}  // namespace

LevMarResult levmar(const ResidualFn& residuals, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                    const Eigen::VectorXd& upper, int max_iter) {
    const int p = static_cast<int>(x0.size());
    LevMarResult out;
    out.x = clamp_to_box(std::move(x0), lower, upper);

    Eigen::VectorXd r = residuals(out.x);
    out.n_residuals = static_cast<int>(r.size());
    out.cost = r.squaredNorm();

    double lambda = 1e-3;
    Eigen::MatrixXd J(r.size(), p);

    for (int iter = 0; iter < max_iter; ++iter) {
        out.iterations = iter + 1;
        // forward-difference Jacobian
        for (int j = 0; j < p; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(out.x[j]));
            Eigen::VectorXd xp = out.x;
            xp[j] = std::min(out.x[j] + h, upper[j]);
            double hj = xp[j] - out.x[j];
            if (hj == 0.0) {  // pinned at the upper bound, step down instead
                xp[j] = std::max(out.x[j] - h, lower[j]);
                hj = xp[j] - out.x[j];
                if (hj == 0.0) {
                    J.col(j).setZero();
                    continue;
                }
            }
            J.col(j) = (residuals(xp) - r) / hj;
        }

        const Eigen::MatrixXd jtj = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        out.jtj = jtj;

        bool stepped = false;
        for (int attempt = 0; attempt < 24; ++attempt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd step = a.ldlt().solve(-g);
            const Eigen::VectorXd xt = clamp_to_box(out.x + step, lower, upper);
            const Eigen::VectorXd rt = residuals(xt);
            const double ct = rt.squaredNorm();
            if (ct < out.cost) {
                const double rel = (out.cost - ct) / std::max(out.cost, 1e-300);
                const double dx = (xt - out.x).norm();
                out.x = xt;
                r = rt;
                out.cost = ct;
                lambda = std::max(lambda / 3.0, 1e-12);
                stepped = true;
                if (rel < 1e-12 || dx < 1e-12) {
                    out.converged = true;
                    return out;
                }
                break;
            }
            lambda *= 4.0;
            if (lambda > 1e12) break;
        }
        if (!stepped) {
            out.converged = true;  // stationary within damping range
            return out;
        }
    }
    out.converged = false;  // hit the iteration cap
    return out;
}

LevMarResult levmar(const ResidualFn& residuals, Eigen::VectorXd x0, int max_iter) {
    const int p = static_cast<int>(x0.size());
    const double inf = std::numeric_limits<double>::infinity();
    return levmar(residuals, std::move(x0), Eigen::VectorXd::Constant(p, -inf),
                  Eigen::VectorXd::Constant(p, inf), max_iter);
}

}  // namespace qcns
