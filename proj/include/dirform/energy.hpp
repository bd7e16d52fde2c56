#ifndef DIRFORM_ENERGY_HPP
#define DIRFORM_ENERGY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dirform/linalg.hpp"
#include "dirform/network.hpp"

namespace dirform {

/// E(f, g) = Σ_e c_e (∂f)_e (∂g)_e.
inline double energy(const ResistanceNetwork& net, const FunctionVector& f, const FunctionVector& g)
{
    require_vertex_function(net, f, "f");
    require_vertex_function(net, g, "g");
    double sum = 0.0;
    for (const auto& e : net.edges()) {
        const auto t = static_cast<Eigen::Index>(e.tail);
        const auto h = static_cast<Eigen::Index>(e.head);
        sum += e.conductance * (f[h] - f[t]) * (g[h] - g[t]);
    }
    return sum;
}

inline double energy(const ResistanceNetwork& net, const FunctionVector& f) { return energy(net, f, f); }

/// The L²(μ) generator (Lf)(x) = μ(x)⁻¹ Σ_{e∋x} c_e (f(y_e) − f(x)).
class Generator {
public:
    Generator(const ResistanceNetwork& net, const MeasureVector& mu) : net_(net), mu_(mu)
    {
        require_measure(net, mu, "reference measure");
    }

    FunctionVector apply(const FunctionVector& f) const
    {
        require_vertex_function(net_, f, "function");
        FunctionVector out = FunctionVector::Zero(f.size());
        for (std::size_t x = 0; x < net_.num_vertices(); ++x) {
            double acc = 0.0;
            for (auto e : net_.incident(x)) {
                const auto y = net_.other_end(e, x);
                acc += net_.edge(e).conductance * (f[static_cast<Eigen::Index>(y)] - f[static_cast<Eigen::Index>(x)]);
            }
            out[static_cast<Eigen::Index>(x)] = acc / mu_[x];
        }
        return out;
    }

    /// Dense matrix of L = −diag(μ)⁻¹ Δ with Δ the combinatorial Laplacian.
    Eigen::MatrixXd matrix() const
    {
        return -(mu_.weights().cwiseInverse().asDiagonal() * net_.laplacian());
    }

    /// Eigenvalues of −L in ascending order with μ-orthonormal eigenfunctions
    /// as columns.
    struct Eigenbasis {
        Eigen::VectorXd values;
        Eigen::MatrixXd functions;
    };

    Eigenbasis eigenbasis() const
    {
        const Eigen::VectorXd s = mu_.weights().cwiseSqrt().cwiseInverse();
        Eigen::MatrixXd sym = s.asDiagonal() * net_.laplacian() * s.asDiagonal();
        sym = 0.5 * (sym + sym.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
        if (solver.info() != Eigen::Success)
            throw Error(ErrorCode::solver_failure, "eigensolver failed on the generator");
        return {solver.eigenvalues(), s.asDiagonal() * solver.eigenvectors()};
    }

    const MeasureVector& measure() const noexcept { return mu_; }

private:
    ResistanceNetwork net_;
    MeasureVector mu_;
};

inline Generator generator(const ResistanceNetwork& net, const MeasureVector& mu) { return Generator(net, mu); }

/// ⟨f, g⟩ in L²(μ).
inline double inner_mu(const MeasureVector& mu, const FunctionVector& f, const FunctionVector& g)
{
    return (mu.weights().array() * f.array() * g.array()).sum();
}

/// Γ(f,g)({x}) = ½ Σ_{e∋x} c_e (∂f)_e (∂g)_e.
inline EnergyMeasureVector energy_measure_edge(const ResistanceNetwork& net, const FunctionVector& f,
                                               const FunctionVector& g)
{
    const Eigen::VectorXd df = edge_differences(net, f);
    const Eigen::VectorXd dg = edge_differences(net, g);
    EnergyMeasureVector out = EnergyMeasureVector::Zero(static_cast<Eigen::Index>(net.num_vertices()));
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
        const auto& edge = net.edge(e);
        const double half = 0.5 * edge.conductance * df[static_cast<Eigen::Index>(e)] * dg[static_cast<Eigen::Index>(e)];
        out[static_cast<Eigen::Index>(edge.tail)] += half;
        out[static_cast<Eigen::Index>(edge.head)] += half;
    }
    return out;
}

namespace detail {

/// E(f, g) restricted to the given edges.
inline double energy_on(const ResistanceNetwork& net, std::span<const std::size_t> edges, const FunctionVector& f,
                        const FunctionVector& g)
{
    double sum = 0.0;
    for (auto e : edges) {
        const auto& edge = net.edge(e);
        const auto t = static_cast<Eigen::Index>(edge.tail);
        const auto h = static_cast<Eigen::Index>(edge.head);
        sum += edge.conductance * (f[h] - f[t]) * (g[h] - g[t]);
    }
    return sum;
}

}  // namespace detail

/// Γ(f,g)({x}) via ∫φ dΓ(f,g) = ½(E(φf,g) + E(φg,f) − E(φ,fg)) with φ = 1_x.
/// Only edges touching x can carry energy of φf, φg or φ.
inline EnergyMeasureVector energy_measure_from_form(const ResistanceNetwork& net, const FunctionVector& f,
                                                    const FunctionVector& g)
{
    require_vertex_function(net, f, "f");
    require_vertex_function(net, g, "g");
    const FunctionVector fg = f.cwiseProduct(g);
    EnergyMeasureVector out(static_cast<Eigen::Index>(net.num_vertices()));
    for (std::size_t x = 0; x < net.num_vertices(); ++x) {
        const FunctionVector phi = indicator(net, x);
        const auto star = net.incident(x);
        out[static_cast<Eigen::Index>(x)] =
            0.5 * (detail::energy_on(net, star, phi.cwiseProduct(f), g) +
                   detail::energy_on(net, star, phi.cwiseProduct(g), f) - detail::energy_on(net, star, phi, fg));
    }
    return out;
}

/// Mutual energy measure, computed by both routes and checked to agree
/// within 1e-12 of the local magnitude.
inline EnergyMeasureVector energy_measure(const ResistanceNetwork& net, const FunctionVector& f,
                                          const FunctionVector& g)
{
    const EnergyMeasureVector direct = energy_measure_edge(net, f, g);
    const EnergyMeasureVector form = energy_measure_from_form(net, f, g);
    for (std::size_t x = 0; x < net.num_vertices(); ++x) {
        double scale = 1.0;
        for (auto e : net.incident(x)) {
            const auto& edge = net.edge(e);
            const auto t = static_cast<Eigen::Index>(edge.tail);
            const auto h = static_cast<Eigen::Index>(edge.head);
            scale += edge.conductance * (std::abs(f[t]) + std::abs(f[h])) * (std::abs(g[t]) + std::abs(g[h]));
        }
        const auto i = static_cast<Eigen::Index>(x);
        if (std::abs(direct[i] - form[i]) > 1e-12 * scale)
            throw Error(ErrorCode::internal, "energy measure routes disagree at vertex " + net.id(x));
    }
    return direct;
}

inline EnergyMeasureVector energy_measure(const ResistanceNetwork& net, const FunctionVector& f)
{
    return energy_measure(net, f, f);
}

/// Effective resistance between x and y (unit current in at x, out at y).
inline double effective_resistance(const ResistanceNetwork& net, std::size_t x, std::size_t y)
{
    if (x >= net.num_vertices() || y >= net.num_vertices())
        throw Error(ErrorCode::unknown_vertex, "vertex index out of range");
    if (x == y) return 0.0;
    return GroundedLaplacian(net.laplacian(), y).resistance(x, y);
}

inline double effective_resistance(const ResistanceNetwork& net, std::string_view x, std::string_view y)
{
    return effective_resistance(net, net.index_of(x), net.index_of(y));
}

/// All-pairs effective resistance.
inline Eigen::MatrixXd resistance_matrix(const ResistanceNetwork& net)
{
    return resistance_from_green(GroundedLaplacian(net.laplacian(), 0).green());
}

/// Effective resistance on the graph of `net` with conductances replaced by w.
inline double weighted_resistance(const ResistanceNetwork& net, const Eigen::VectorXd& w, std::size_t x,
                                  std::size_t y)
{
    if (x == y) return 0.0;
    return GroundedLaplacian(net.weighted_laplacian(w), y).resistance(x, y);
}

/// Kron reduction onto `boundary`: Schur complement of the Laplacian, read back
/// as a network on the boundary vertices (kept in original vertex order).
inline ResistanceNetwork trace_to_subset(const ResistanceNetwork& net, std::span<const std::string> boundary)
{
    if (boundary.empty()) throw Error(ErrorCode::invalid_argument, "trace boundary is empty");
    const std::size_t n = net.num_vertices();
    std::vector<char> keep(n, 0);
    for (const auto& id : boundary) keep[net.index_of(id)] = 1;
    std::vector<Eigen::Index> b_idx, i_idx;
    for (std::size_t v = 0; v < n; ++v) (keep[v] ? b_idx : i_idx).push_back(static_cast<Eigen::Index>(v));

    const Eigen::MatrixXd lap = net.laplacian();
    const auto nb = static_cast<Eigen::Index>(b_idx.size());
    const auto ni = static_cast<Eigen::Index>(i_idx.size());
    Eigen::MatrixXd schur = lap(b_idx, b_idx);
    if (ni > 0) {
        const Eigen::MatrixXd lii = lap(i_idx, i_idx);
        const Eigen::MatrixXd lib = lap(i_idx, b_idx);
        Eigen::LLT<Eigen::MatrixXd> llt(lii);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorCode::solver_failure, "interior block of the laplacian is singular");
        schur -= lib.transpose() * llt.solve(lib);
    }

    double scale = 0.0;
    for (Eigen::Index i = 0; i < nb; ++i) scale = std::max(scale, std::abs(schur(i, i)));
    const double drop = 1e-14 * scale;

    std::vector<std::string> ids;
    for (auto v : b_idx) ids.push_back(net.id(static_cast<std::size_t>(v)));
    std::vector<Edge> edges;
    for (Eigen::Index i = 0; i < nb; ++i)
        for (Eigen::Index j = i + 1; j < nb; ++j) {
            const double c = -0.5 * (schur(i, j) + schur(j, i));
            if (c > drop) edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), c});
        }
    return ResistanceNetwork::from_edges(std::move(ids), edges);
}

}  // namespace dirform

#endif
