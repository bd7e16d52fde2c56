#ifndef DIRFORM_LINALG_HPP
#define DIRFORM_LINALG_HPP

#include <cstddef>

#include <Eigen/Dense>

#include "dirform/error.hpp"

namespace dirform {

/// Dense factorization of a connected graph Laplacian with one vertex grounded.
///
/// The grounded block is positive definite, so solve() returns the potential u
/// with u(ground) = 0 for any right-hand side summing to zero.
class GroundedLaplacian {
public:
    explicit GroundedLaplacian(const Eigen::MatrixXd& laplacian, std::size_t ground = 0)
        : n_(laplacian.rows()), ground_(static_cast<Eigen::Index>(ground))
    {
        if (laplacian.rows() != laplacian.cols())
            throw Error(ErrorCode::internal, "laplacian must be square");
        if (ground_ >= n_) throw Error(ErrorCode::internal, "ground vertex out of range");
        if (n_ == 1) return;
        Eigen::MatrixXd reduced(n_ - 1, n_ - 1);
        for (Eigen::Index i = 0, ri = 0; i < n_; ++i) {
            if (i == ground_) continue;
            for (Eigen::Index j = 0, rj = 0; j < n_; ++j) {
                if (j == ground_) continue;
                reduced(ri, rj) = laplacian(i, j);
                ++rj;
            }
            ++ri;
        }
        llt_.compute(reduced);
        if (llt_.info() != Eigen::Success)
            throw Error(ErrorCode::solver_failure, "grounded laplacian is not positive definite");
    }

    Eigen::Index size() const noexcept { return n_; }

    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const
    {
        Eigen::VectorXd u = Eigen::VectorXd::Zero(n_);
        if (n_ == 1) return u;
        Eigen::VectorXd reduced(n_ - 1);
        for (Eigen::Index i = 0, r = 0; i < n_; ++i)
            if (i != ground_) reduced[r++] = rhs[i];
        const Eigen::VectorXd x = llt_.solve(reduced);
        for (Eigen::Index i = 0, r = 0; i < n_; ++i)
            if (i != ground_) u[i] = x[r++];
        return u;
    }

    /// Inverse of the grounded block, embedded with a zero row and column at the ground.
    Eigen::MatrixXd green() const
    {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_, n_);
        if (n_ == 1) return g;
        const Eigen::MatrixXd inv = llt_.solve(Eigen::MatrixXd::Identity(n_ - 1, n_ - 1));
        for (Eigen::Index i = 0, ri = 0; i < n_; ++i) {
            if (i == ground_) continue;
            for (Eigen::Index j = 0, rj = 0; j < n_; ++j) {
                if (j == ground_) continue;
                g(i, j) = inv(ri, rj);
                ++rj;
            }
            ++ri;
        }
        return g;
    }

    /// (1_x − 1_y)ᵀ L⁺ (1_x − 1_y).
    double resistance(std::size_t x, std::size_t y) const
    {
        if (x == y) return 0.0;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n_);
        b[static_cast<Eigen::Index>(x)] = 1.0;
        b[static_cast<Eigen::Index>(y)] = -1.0;
        const Eigen::VectorXd u = solve(b);
        return u[static_cast<Eigen::Index>(x)] - u[static_cast<Eigen::Index>(y)];
    }

private:
    Eigen::Index n_;
    Eigen::Index ground_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// All-pairs resistance G_xx + G_yy − 2 G_xy from a grounded Green matrix.
inline Eigen::MatrixXd resistance_from_green(const Eigen::MatrixXd& g)
{
    const Eigen::Index n = g.rows();
    Eigen::MatrixXd r(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) r(i, j) = i == j ? 0.0 : g(i, i) + g(j, j) - 2.0 * g(i, j);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) r(j, i) = r(i, j) = 0.5 * (r(i, j) + r(j, i));
    return r;
}

}  // namespace dirform

#endif
