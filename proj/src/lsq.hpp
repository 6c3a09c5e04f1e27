#pragma once

// Small nonlinear least-squares driver shared by the peak and relaxation fits.

#include "ddspec/error.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace ddspec::detail {

struct LsqResult {
    std::vector<double> p;
    std::vector<double> se;  // standard errors from s^2 (J^T J)^-1
    double rss = 0.0;
    double rms = 0.0;
    int dof = 0;
    int status = 0;
};

// two-sided 95% Student-t multiplier; falls back to 1.96 when dof is large
inline double t95(int dof) {
    if (dof < 1) return std::nan("");
    boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(boost::math::complement(dist, 0.025));
}

// model(p, out) fills residuals. Parameters are optimised as p / scale so
// that quantities of very different size condition well.
using ResidualFn = std::function<void(const std::vector<double>&, std::vector<double>&)>;

inline LsqResult levenberg_marquardt(const ResidualFn& model, std::vector<double> p0, const std::vector<double>& scale,
                                     int n_res, int max_evals = 4000) {
    const int np = static_cast<int>(p0.size());
    if (n_res <= np) throw InsufficientDataError("least squares needs more points than parameters");

    struct Functor : Eigen::DenseFunctor<double> {
        const ResidualFn* f;
        const std::vector<double>* s;
        Functor(int np, int nr, const ResidualFn* fn, const std::vector<double>* sc)
            : Eigen::DenseFunctor<double>(np, nr), f(fn), s(sc) {}
        std::vector<double> unscale(const Eigen::VectorXd& q) const {
            std::vector<double> p(static_cast<std::size_t>(q.size()));
            for (Eigen::Index i = 0; i < q.size(); ++i) p[static_cast<std::size_t>(i)] = q[i] * (*s)[static_cast<std::size_t>(i)];
            return p;
        }
        int operator()(const Eigen::VectorXd& q, Eigen::VectorXd& fv) const {
            std::vector<double> r(static_cast<std::size_t>(values()));
            (*f)(unscale(q), r);
            for (int i = 0; i < values(); ++i) fv[i] = r[static_cast<std::size_t>(i)];
            return 0;
        }
        int df(const Eigen::VectorXd& q, Eigen::MatrixXd& J) const {
            Eigen::VectorXd a(values()), b(values());
            Eigen::VectorXd qq = q;
            for (int j = 0; j < inputs(); ++j) {
                const double h = 1e-6 * std::max(1.0, std::fabs(q[j]));
                qq[j] = q[j] + h;
                (*this)(qq, a);
                qq[j] = q[j] - h;
                (*this)(qq, b);
                qq[j] = q[j];
                J.col(j) = (a - b) / (2.0 * h);
            }
            return 0;
        }
    };

    Functor fn(np, n_res, &model, &scale);
    Eigen::VectorXd q(np);
    for (int i = 0; i < np; ++i) q[i] = p0[static_cast<std::size_t>(i)] / scale[static_cast<std::size_t>(i)];
    Eigen::LevenbergMarquardt<Functor> lm(fn);
    lm.setMaxfev(max_evals);
    lm.setFtol(1e-15);
    lm.setXtol(1e-15);
    lm.setGtol(0.0);
    const auto status = lm.minimize(q);

    LsqResult r;
    r.status = static_cast<int>(status);
    r.p = fn.unscale(q);
    Eigen::VectorXd fv(n_res);
    fn(q, fv);
    r.rss = fv.squaredNorm();
    r.dof = n_res - np;
    r.rms = std::sqrt(r.rss / n_res);

    bool ok = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
              status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation && fv.allFinite();
    for (double v : r.p) ok = ok && std::isfinite(v);
    if (!ok) throw FitFailure("least squares did not converge (status " + std::to_string(r.status) + ")", r.rms);

    Eigen::MatrixXd J(n_res, np);
    fn.df(q, J);
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::MatrixXd cov = JtJ.completeOrthogonalDecomposition().pseudoInverse() * (r.rss / r.dof);
    r.se.resize(static_cast<std::size_t>(np));
    for (int i = 0; i < np; ++i)
        r.se[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, cov(i, i))) * scale[static_cast<std::size_t>(i)];
    return r;
}

} // namespace ddspec::detail
