#ifndef DIRFORM_METRICS_HPP
#define DIRFORM_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "dirform/barrier.hpp"
#include "dirform/energy.hpp"
#include "dirform/report.hpp"
#include "dirform/spaces.hpp"

namespace dirform {

enum class MetricKind { resistance, sqrt_resistance, coordinate, intrinsic, path_length, connes };

inline const char* to_string(MetricKind kind)
{
    switch (kind) {
    case MetricKind::resistance: return "resistance";
    case MetricKind::sqrt_resistance: return "sqrt_resistance";
    case MetricKind::coordinate: return "coordinate";
    case MetricKind::intrinsic: return "intrinsic";
    case MetricKind::path_length: return "path_length";
    case MetricKind::connes: return "connes";
    }
    return "unknown";
}

/// Symmetric vertex × vertex distance table.
struct MetricMatrix {
    MetricKind kind;
    Eigen::MatrixXd values;

    double operator()(std::size_t x, std::size_t y) const
    {
        return values(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
    }

    /// Description of the first violated metric axiom, if any. Infinite entries
    /// are allowed (metrics in the wide sense).
    std::optional<std::string> axiom_violation(double tolerance = 1e-9) const
    {
        const Eigen::Index n = values.rows();
        if (values.cols() != n) return "not square";
        for (Eigen::Index i = 0; i < n; ++i) {
            if (values(i, i) != 0.0) return "nonzero diagonal at " + std::to_string(i);
            for (Eigen::Index j = 0; j < n; ++j) {
                if (values(i, j) != values(j, i)) return "asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")";
                if (i != j && !(values(i, j) > 0.0)) return "nonpositive off-diagonal at (" + std::to_string(i) + "," + std::to_string(j) + ")";
            }
        }
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double via = values(i, k) + values(k, j);
                    if (std::isfinite(via) && values(i, j) > via + tolerance)
                        return "triangle inequality fails for (" + std::to_string(i) + "," + std::to_string(k) + "," +
                               std::to_string(j) + ")";
                }
        return std::nullopt;
    }
};

inline void symmetrize(Eigen::MatrixXd& m)
{
    m = (0.5 * (m + m.transpose())).eval();
    m.diagonal().setZero();
}

inline MetricMatrix resistance_metric(const ResistanceNetwork& net)
{
    return {MetricKind::resistance, resistance_matrix(net)};
}

/// d_R^{1/2}, evaluated as √d_R and, independently, as the value of the
/// maximizer u/√E(u) of f(x) − f(y) over E(f) ≤ 1 (u the potential of a unit
/// current). The routes must agree within 1e-9.
inline MetricMatrix sqrt_resistance_metric(const ResistanceNetwork& net)
{
    const std::size_t n = net.num_vertices();
    Eigen::MatrixXd root = resistance_matrix(net).cwiseSqrt();
    const Eigen::MatrixXd green = GroundedLaplacian(net.laplacian(), n - 1).green();
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y) {
            const FunctionVector u = green.col(static_cast<Eigen::Index>(x)) - green.col(static_cast<Eigen::Index>(y));
            const double e = energy(net, u);
            const double value = (u[static_cast<Eigen::Index>(x)] - u[static_cast<Eigen::Index>(y)]) / std::sqrt(e);
            const double direct = root(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
            if (std::abs(value - direct) > 1e-9 * std::max(1.0, direct))
                throw Error(ErrorCode::internal, "sqrt resistance routes disagree for " + net.id(x) + ", " + net.id(y));
        }
    symmetrize(root);
    return {MetricKind::sqrt_resistance, root};
}

/// d_φ(x, y) = max_k |f_k(x) − f_k(y)|.
inline MetricMatrix coordinate_metric(const ResistanceNetwork& net, const CoordinateSequence& coords)
{
    if (auto pair = first_unseparated_pair(net, coords.functions))
        throw Error(ErrorCode::precondition, "coordinates do not separate " + net.id(pair->first) + " and " +
                                                 net.id(pair->second));
    const auto n = static_cast<Eigen::Index>(net.num_vertices());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (const auto& f : coords.functions)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) d(i, j) = std::max(d(i, j), std::abs(f[i] - f[j]));
    return {MetricKind::coordinate, d};
}

// ---------------------------------------------------------------------------
// Intrinsic metric as a quadratically constrained program

/// maximize f(x) − f(y) subject to Γ(f)({v}) ≤ m(v) for every vertex, with
/// f(y) = 0 pinned. Barrier −Σ log(m(v) − Γ(f)({v})); the multipliers
/// λ_v = 1/(t s_v) give the dual bound Σ λ_v m(v) + R_w(x, y)/4, where R_w is
/// the effective resistance for edge weights w_e = c_e (λ_tail + λ_head)/2.
class IntrinsicProblem {
public:
    IntrinsicProblem(const ResistanceNetwork& net, const MeasureVector& m, std::size_t x, std::size_t y)
        : net_(net), m_(m), x_(x), y_(y)
    {
        const auto n = static_cast<Eigen::Index>(net.num_vertices());
        objective_ = Eigen::VectorXd::Zero(n - 1);
        objective_[reduced(x)] = 1.0;
    }

    Eigen::Index dimension() const { return objective_.size(); }
    const Eigen::VectorXd& objective() const { return objective_; }
    double barrier_degree() const { return static_cast<double>(net_.num_vertices()); }

    FunctionVector expand(const Eigen::VectorXd& z) const
    {
        FunctionVector f(z.size() + 1);
        for (Eigen::Index v = 0, r = 0; v < f.size(); ++v) f[v] = v == static_cast<Eigen::Index>(y_) ? 0.0 : z[r++];
        return f;
    }

    Eigen::VectorXd slacks(const FunctionVector& f) const
    {
        return m_.weights() - energy_measure_edge(net_, f, f);
    }

    bool barrier(const Eigen::VectorXd& z, BarrierTerms& terms, bool derivs) const
    {
        const FunctionVector f = expand(z);
        const Eigen::VectorXd s = slacks(f);
        if ((s.array() <= 0.0).any()) return false;
        terms.value = -s.array().log().sum();
        if (!derivs) return true;

        const auto n = static_cast<Eigen::Index>(net_.num_vertices());
        const Eigen::VectorXd diff = edge_differences(net_, f);
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd w(static_cast<Eigen::Index>(net_.num_edges()));
        for (std::size_t e = 0; e < net_.num_edges(); ++e) {
            const auto& edge = net_.edge(e);
            const double inv = 1.0 / s[ix(edge.tail)] + 1.0 / s[ix(edge.head)];
            w[ix(e)] = edge.conductance * inv;
            const double g = edge.conductance * diff[ix(e)] * inv;
            grad[ix(edge.head)] += g;
            grad[ix(edge.tail)] -= g;
        }
        Eigen::MatrixXd hess = net_.weighted_laplacian(w);
        // Rank-one terms ∇Γ_v ∇Γ_vᵀ / s_v², with ∇Γ_v = Σ_{e∋v} c_e (∂f)_e (1_head − 1_tail).
        for (std::size_t v = 0; v < net_.num_vertices(); ++v) {
            const double inv2 = 1.0 / (s[ix(v)] * s[ix(v)]);
            const auto star = net_.incident(v);
            for (auto e1 : star) {
                const auto& a = net_.edge(e1);
                const double ga = a.conductance * diff[ix(e1)];
                for (auto e2 : star) {
                    const auto& b = net_.edge(e2);
                    const double val = ga * b.conductance * diff[ix(e2)] * inv2;
                    hess(ix(a.head), ix(b.head)) += val;
                    hess(ix(a.head), ix(b.tail)) -= val;
                    hess(ix(a.tail), ix(b.head)) -= val;
                    hess(ix(a.tail), ix(b.tail)) += val;
                }
            }
        }
        terms.gradient = drop(grad);
        terms.hessian = drop(hess);
        return true;
    }

    Eigen::VectorXd multipliers(const Eigen::VectorXd& z, double t) const
    {
        return slacks(expand(z)).cwiseInverse() / t;
    }

    double dual_bound(const Eigen::VectorXd& z, double t) const
    {
        const Eigen::VectorXd lambda = multipliers(z, t);
        if ((lambda.array() <= 0.0).any() || !lambda.allFinite()) return std::numeric_limits<double>::infinity();
        Eigen::VectorXd w(static_cast<Eigen::Index>(net_.num_edges()));
        for (std::size_t e = 0; e < net_.num_edges(); ++e) {
            const auto& edge = net_.edge(e);
            w[ix(e)] = edge.conductance * 0.5 * (lambda[ix(edge.tail)] + lambda[ix(edge.head)]);
        }
        return lambda.dot(m_.weights()) + 0.25 * weighted_resistance(net_, w, x_, y_);
    }

private:
    static Eigen::Index ix(std::size_t i) { return static_cast<Eigen::Index>(i); }
    Eigen::Index reduced(std::size_t v) const { return ix(v) - (v > y_ ? 1 : 0); }

    Eigen::VectorXd drop(const Eigen::VectorXd& full) const
    {
        Eigen::VectorXd out(full.size() - 1);
        for (Eigen::Index v = 0, r = 0; v < full.size(); ++v)
            if (v != ix(y_)) out[r++] = full[v];
        return out;
    }

    Eigen::MatrixXd drop(const Eigen::MatrixXd& full) const
    {
        std::vector<Eigen::Index> keep;
        for (Eigen::Index v = 0; v < full.rows(); ++v)
            if (v != ix(y_)) keep.push_back(v);
        return full(keep, keep);
    }

    const ResistanceNetwork& net_;
    const MeasureVector& m_;
    std::size_t x_;
    std::size_t y_;
    Eigen::VectorXd objective_;
};

struct IntrinsicSolution {
    double distance = 0.0;
    double upper_bound = 0.0;
    FunctionVector maximizer;  // pinned to 0 at y
    std::vector<std::size_t> active_vertices;
    SolverStats stats;
};

inline IntrinsicSolution intrinsic_metric(const ResistanceNetwork& net, const MeasureVector& m, std::size_t x,
                                          std::size_t y, const BarrierOptions& options = {})
{
    require_measure(net, m, "energy dominant measure");
    if (x >= net.num_vertices() || y >= net.num_vertices())
        throw Error(ErrorCode::unknown_vertex, "vertex index out of range");
    IntrinsicSolution sol;
    if (x == y) {
        sol.maximizer = FunctionVector::Zero(static_cast<Eigen::Index>(net.num_vertices()));
        return sol;
    }
    IntrinsicProblem problem(net, m, x, y);
    const BarrierResult r = maximize_linear(problem, options);
    sol.maximizer = problem.expand(r.point);
    sol.distance = r.primal;
    sol.upper_bound = r.upper_bound;
    sol.stats = r.stats;
    const Eigen::VectorXd gamma = energy_measure_edge(net, sol.maximizer, sol.maximizer);
    for (std::size_t v = 0; v < net.num_vertices(); ++v) {
        if (gamma[static_cast<Eigen::Index>(v)] > m[v] * (1.0 + 1e-8))
            throw Error(ErrorCode::internal, "intrinsic maximizer is infeasible at " + net.id(v));
        if (gamma[static_cast<Eigen::Index>(v)] >= m[v] * (1.0 - 1e-6)) sol.active_vertices.push_back(v);
    }
    return sol;
}

inline IntrinsicSolution intrinsic_metric(const ResistanceNetwork& net, const MeasureVector& m, std::string_view x,
                                          std::string_view y, const BarrierOptions& options = {})
{
    return intrinsic_metric(net, m, net.index_of(x), net.index_of(y), options);
}

inline MetricMatrix intrinsic_metric_matrix(const ResistanceNetwork& net, const MeasureVector& m,
                                            const BarrierOptions& options = {})
{
    const auto n = static_cast<Eigen::Index>(net.num_vertices());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d(i, j) = d(j, i) =
                intrinsic_metric(net, m, static_cast<std::size_t>(i), static_cast<std::size_t>(j), options).distance;
    return {MetricKind::intrinsic, d};
}

/// Σ over the tree path of length_e √density_e.
inline double intrinsic_metric_tree(const MetricTree& tree, std::size_t x, std::size_t y)
{
    double sum = 0.0;
    for (auto e : tree.edge_path(x, y)) sum += tree.edge_length(e) * std::sqrt(tree.edge_density(e));
    return sum;
}

inline double intrinsic_metric_tree(const MetricTree& tree, std::string_view x, std::string_view y)
{
    return intrinsic_metric_tree(tree, tree.network().index_of(x), tree.network().index_of(y));
}

/// Shortest chain through graph edges with hop cost d(u, v).
inline MetricMatrix path_length_metric(const MetricMatrix& d, const ResistanceNetwork& net)
{
    const auto n = static_cast<Eigen::Index>(net.num_vertices());
    if (d.values.rows() != n) throw Error(ErrorCode::index_mismatch, "metric and network sizes differ");
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd l = Eigen::MatrixXd::Constant(n, n, inf);
    for (Eigen::Index i = 0; i < n; ++i) l(i, i) = 0.0;
    for (const auto& e : net.edges()) {
        const auto u = static_cast<Eigen::Index>(e.tail);
        const auto v = static_cast<Eigen::Index>(e.head);
        l(u, v) = l(v, u) = d.values(u, v);
    }
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) l(i, j) = std::min(l(i, j), l(i, k) + l(k, j));
    return {MetricKind::path_length, l};
}

// ---------------------------------------------------------------------------
// Comparisons

struct ChainReport {
    MetricMatrix coordinate;
    MetricMatrix intrinsic;
    MetricMatrix sqrt_resistance;
    std::vector<Report> checks;  // two per unordered pair
    bool pass = false;
};

/// d_φ ≤ d_{Γ,m} ≤ d_R^{1/2} entrywise. Requires m(X) ≤ 1 and Γ(f_k) ≤ m.
inline ChainReport compare_metric_chain(const ResistanceNetwork& net, const MeasureVector& m,
                                        const CoordinateSequence& coords, double tolerance = 1e-6,
                                        const BarrierOptions& options = {})
{
    require_measure(net, m, "energy dominant measure");
    if (m.total() > 1.0 + 1e-12)
        throw Error(ErrorCode::precondition, "metric chain needs m(X) <= 1, got " + std::to_string(m.total()));
    if (!coordinates_dominated(net, coords, m))
        throw Error(ErrorCode::precondition, "metric chain needs Gamma(f_k) <= m for every coordinate");
    ChainReport report{coordinate_metric(net, coords), intrinsic_metric_matrix(net, m, options),
                       sqrt_resistance_metric(net), {}, false};
    for (std::size_t x = 0; x < net.num_vertices(); ++x)
        for (std::size_t y = x + 1; y < net.num_vertices(); ++y) {
            const std::string pair = "(" + net.id(x) + "," + net.id(y) + ")";
            report.checks.push_back(
                bound_report("coordinate<=intrinsic" + pair, report.coordinate(x, y), report.intrinsic(x, y), tolerance));
            report.checks.push_back(bound_report("intrinsic<=sqrt_resistance" + pair, report.intrinsic(x, y),
                                                 report.sqrt_resistance(x, y), tolerance));
        }
    report.pass = all_pass(report.checks);
    return report;
}

struct Triple {
    std::size_t x;
    std::size_t z;
    std::size_t y;
};

/// d(x, y) = d(x, z) + d(z, y) for z on the tree path from x to y, exact for
/// the closed form (within 1e-8). With solve_network set, the barrier solver on
/// the lumped network must also satisfy d(x, y) ≤ d(x, z) + d(z, y).
inline std::vector<Report> dendrite_additivity_check(const MetricTree& tree, std::span<const Triple> triples,
                                                     bool solve_network = false, const BarrierOptions& options = {})
{
    const auto& net = tree.network();
    const MeasureVector mu = tree.lumped_measure();
    std::vector<Report> out;
    for (const auto& [x, z, y] : triples) {
        const auto path = tree.vertex_path(x, y);
        if (std::find(path.begin(), path.end(), z) == path.end())
            throw Error(ErrorCode::precondition, "vertex " + net.id(z) + " is not on the path from " + net.id(x) +
                                                     " to " + net.id(y));
        const std::string label = "(" + net.id(x) + "," + net.id(z) + "," + net.id(y) + ")";
        out.push_back(equality_report("additivity" + label, intrinsic_metric_tree(tree, x, y),
                                      intrinsic_metric_tree(tree, x, z) + intrinsic_metric_tree(tree, z, y), 1e-8));
        if (solve_network) {
            const double dxy = intrinsic_metric(net, mu, x, y, options).distance;
            const double dxz = intrinsic_metric(net, mu, x, z, options).distance;
            const double dzy = intrinsic_metric(net, mu, z, y, options).distance;
            out.push_back(bound_report("additivity-solver" + label, dxy, dxz + dzy, 1e-6));
        }
    }
    return out;
}

}  // namespace dirform

#endif
