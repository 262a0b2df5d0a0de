#pragma once

// Damped least-squares (Levenberg-Marquardt) root finder for square real
// systems, with a forward-difference Jacobian.

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace scc {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct SolveOptions {
    Scalar tol_residual{1e-8};
    int max_iters{200};
    Scalar lambda0{1e-3};
    Scalar lambda_up{10};
    Scalar lambda_down{0.1};
    Scalar fd_step{1e-7};
    // Damping beyond this means no descent direction was found.
    Scalar lambda_max{1e12};
    Scalar lambda_min{1e-14};
};

enum class SolveStatus { converged, no_convergence };

template <typename Scalar>
struct SolveOutcome {
    SolveStatus status = SolveStatus::no_convergence;
    VectorX<Scalar> x;
    Scalar residual_norm = std::numeric_limits<Scalar>::infinity();
    int iters = 0;

    bool converged() const { return status == SolveStatus::converged; }
};

/// Residual callables have the form bool(const VectorX&, VectorX& out) and
/// return false (or produce non-finite entries) when evaluation fails.
template <typename Scalar, typename Residual>
bool evaluate(const Residual& residual, const VectorX<Scalar>& x, VectorX<Scalar>& out)
{
    return residual(x, out) && out.allFinite();
}

/// Forward-difference Jacobian with per-column step h * max(1, |x_j|).
template <typename Scalar, typename Residual>
bool forward_difference_jacobian(const Residual& residual, const VectorX<Scalar>& x, const VectorX<Scalar>& r0,
                                 Scalar step, MatrixX<Scalar>& jac)
{
    const Eigen::Index n = x.size();
    jac.resize(r0.size(), n);
    VectorX<Scalar> xp = x;
    VectorX<Scalar> rp(r0.size());
    for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar h = step * std::max(Scalar(1), std::abs(x(j)));
        xp(j) = x(j) + h;
        if (!evaluate<Scalar>(residual, xp, rp)) {
            return false;
        }
        jac.col(j) = (rp - r0) / h;
        xp(j) = x(j);
    }
    return true;
}

/// Central-difference Jacobian, used to cross-check the forward one.
template <typename Scalar, typename Residual>
bool central_difference_jacobian(const Residual& residual, const VectorX<Scalar>& x, Eigen::Index rows,
                                 Scalar step, MatrixX<Scalar>& jac)
{
    const Eigen::Index n = x.size();
    jac.resize(rows, n);
    VectorX<Scalar> xp = x;
    VectorX<Scalar> rp(rows), rm(rows);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Scalar h = step * std::max(Scalar(1), std::abs(x(j)));
        xp(j) = x(j) + h;
        if (!evaluate<Scalar>(residual, xp, rp)) {
            return false;
        }
        xp(j) = x(j) - h;
        if (!evaluate<Scalar>(residual, xp, rm)) {
            return false;
        }
        jac.col(j) = (rp - rm) / (Scalar(2) * h);
        xp(j) = x(j);
    }
    return true;
}

/// Classic LM: step = -(J^T J + lambda I)^-1 J^T R, accepted when the
/// squared residual decreases. Converged when ||R||_inf < tol_residual.
template <typename Scalar, typename Residual>
SolveOutcome<Scalar> levenberg_marquardt(const Residual& residual, VectorX<Scalar> x0,
                                         const SolveOptions<Scalar>& opts = {})
{
    SolveOutcome<Scalar> out;
    out.x = std::move(x0);
    const Eigen::Index n = out.x.size();

    VectorX<Scalar> r(n);
    if (!evaluate<Scalar>(residual, out.x, r)) {
        return out;
    }
    out.residual_norm = r.template lpNorm<Eigen::Infinity>();

    Scalar lambda = opts.lambda0;
    MatrixX<Scalar> jac;
    MatrixX<Scalar> normal(n, n);
    VectorX<Scalar> grad(n), step(n), x_trial(n), r_trial(n);

    while (out.iters < opts.max_iters) {
        if (out.residual_norm < opts.tol_residual) {
            out.status = SolveStatus::converged;
            return out;
        }
        ++out.iters;
        if (!forward_difference_jacobian<Scalar>(residual, out.x, r, opts.fd_step, jac)) {
            return out;
        }
        normal.noalias() = jac.transpose() * jac;
        grad.noalias() = jac.transpose() * r;
        const Scalar cost = r.squaredNorm();

        bool accepted = false;
        while (!accepted) {
            MatrixX<Scalar> damped = normal;
            damped.diagonal().array() += lambda;
            step = -damped.ldlt().solve(grad);
            x_trial = out.x + step;
            if (step.allFinite() && evaluate<Scalar>(residual, x_trial, r_trial) &&
                r_trial.squaredNorm() < cost) {
                accepted = true;
                out.x = x_trial;
                r = r_trial;
                out.residual_norm = r.template lpNorm<Eigen::Infinity>();
                lambda = std::max(lambda * opts.lambda_down, opts.lambda_min);
            } else {
                lambda *= opts.lambda_up;
                if (lambda > opts.lambda_max) {
                    return out;
                }
            }
        }
    }
    if (out.residual_norm < opts.tol_residual) {
        out.status = SolveStatus::converged;
    }
    return out;
}

} // namespace scc
