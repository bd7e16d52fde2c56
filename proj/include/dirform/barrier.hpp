#ifndef DIRFORM_BARRIER_HPP
#define DIRFORM_BARRIER_HPP

#include <cmath>
#include <concepts>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "dirform/error.hpp"

namespace dirform {

struct BarrierOptions {
    double gap_tolerance = 1e-8;     // absolute, on the certified duality gap
    double relative_gap = 1e-10;     // plus this fraction of |primal|
    double growth = 8.0;             // barrier parameter multiplier per outer step
    double newton_tolerance = 1e-11; // on the halved squared Newton decrement
    int max_outer = 80;
    int max_newton = 6000;
};

struct SolverStats {
    int iterations = 0;      // total Newton steps
    int outer = 0;           // barrier parameter updates
    double residual = 0.0;   // last Newton decrement²/2
    double barrier_parameter = 0.0;
    double certified_gap = 0.0;
};

struct BarrierResult {
    Eigen::VectorXd point;
    double primal = 0.0;       // objective ᵀ point
    double upper_bound = 0.0;  // certified by a feasible dual point
    SolverStats stats;
};

struct BarrierTerms {
    double value = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

/// A convex program "maximize cᵀz over a convex set with 0 in its interior",
/// presented through a self-concordant barrier B and a dual bound.
///
/// barrier() returns false when z is outside the interior. dual_bound(z, t)
/// must return a valid upper bound on the optimum built from the multipliers
/// the barrier induces at z for parameter t.
template <class P>
concept BarrierProblem = requires(const P& p, const Eigen::VectorXd& z, double t, BarrierTerms& terms, bool derivs) {
    { p.dimension() } -> std::convertible_to<Eigen::Index>;
    { p.objective() } -> std::convertible_to<const Eigen::VectorXd&>;
    { p.barrier_degree() } -> std::convertible_to<double>;
    { p.barrier(z, terms, derivs) } -> std::same_as<bool>;
    { p.dual_bound(z, t) } -> std::convertible_to<double>;
};

/// Path-following Newton method on t·cᵀz − B(z); stops once the dual bound
/// certifies the requested gap.
template <BarrierProblem P>
BarrierResult maximize_linear(const P& problem, const BarrierOptions& options = {})
{
    const Eigen::Index n = problem.dimension();
    const Eigen::VectorXd& c = problem.objective();
    BarrierResult result;
    result.point = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd& z = result.point;
    BarrierTerms terms;
    if (!problem.barrier(z, terms, true))
        throw Error(ErrorCode::solver_failure, "barrier solver: the origin is not strictly feasible");

    double t = std::max(1.0, problem.barrier_degree());
    double best_bound = std::numeric_limits<double>::infinity();
    BarrierTerms trial;
    for (int outer = 0; outer < options.max_outer; ++outer) {
        // Centering. Inside the quadratic region (decrement below 1/16) a
        // self-concordant barrier accepts the full Newton step, so no value
        // comparison is needed there; this avoids the roundoff floor of
        // t·cᵀz − B(z) once t is large.
        double previous = std::numeric_limits<double>::infinity();
        for (;;) {
            if (result.stats.iterations >= options.max_newton)
                throw Error(ErrorCode::solver_failure,
                            "barrier solver: Newton iteration limit reached (gap " +
                                std::to_string(best_bound - c.dot(z)) + ")");
            const Eigen::VectorXd grad = terms.gradient - t * c;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(terms.hessian);
            if (ldlt.info() != Eigen::Success)
                throw Error(ErrorCode::solver_failure, "barrier solver: singular Newton system");
            const Eigen::VectorXd step = -ldlt.solve(grad);
            const double decrement = -grad.dot(step);
            ++result.stats.iterations;
            result.stats.residual = 0.5 * decrement;
            if (!(decrement >= 0.0) || !std::isfinite(decrement))
                throw Error(ErrorCode::solver_failure, "barrier solver: indefinite Newton system");
            if (0.5 * decrement <= options.newton_tolerance) break;

            bool accepted = false;
            if (decrement < 0.0625) {
                if (decrement >= previous) break;  // no further progress at working precision
                const Eigen::VectorXd cand = z + step;
                if (problem.barrier(cand, trial, false)) {
                    z = cand;
                    accepted = true;
                }
            }
            previous = decrement;
            if (!accepted) {
                const double phi = terms.value - t * c.dot(z);
                double s = 1.0;
                for (int ls = 0; ls < 60; ++ls, s *= 0.5) {
                    const Eigen::VectorXd cand = z + s * step;
                    if (!problem.barrier(cand, trial, false)) continue;
                    const double phi_new = trial.value - t * c.dot(cand);
                    if (phi_new <= phi - 0.25 * s * decrement && phi_new < phi) {
                        z = cand;
                        accepted = true;
                        break;
                    }
                }
            }
            if (!accepted) break;
            problem.barrier(z, terms, true);
        }

        result.stats.outer = outer;
        result.stats.barrier_parameter = t;
        const double primal = c.dot(z);
        best_bound = std::min(best_bound, problem.dual_bound(z, t));
        const double gap = best_bound - primal;
        if (gap <= options.gap_tolerance + options.relative_gap * std::abs(primal)) {
            result.primal = primal;
            result.upper_bound = best_bound;
            result.stats.certified_gap = std::max(gap, 0.0);
            return result;
        }
        t *= options.growth;
        problem.barrier(z, terms, true);
    }
    throw Error(ErrorCode::solver_failure,
                "barrier solver: gap " + std::to_string(best_bound - c.dot(z)) + " not certified after " +
                    std::to_string(options.max_outer) + " barrier updates");
}

}  // namespace dirform

#endif
