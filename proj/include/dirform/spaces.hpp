#ifndef DIRFORM_SPACES_HPP
#define DIRFORM_SPACES_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dirform/energy.hpp"

namespace dirform {

// ---------------------------------------------------------------------------
// Metric trees

/// Piecewise-constant density on the unit interval [0, 1].
struct DensityProfile {
    std::vector<double> breakpoints;  // strictly increasing, inside (0, 1)
    std::vector<double> values;       // breakpoints.size() + 1 positive values

    static DensityProfile uniform(double value = 1.0) { return {{}, {value}}; }

    void validate() const
    {
        if (values.size() != breakpoints.size() + 1)
            throw Error(ErrorCode::invalid_argument, "density profile needs one more value than breakpoints");
        for (std::size_t i = 0; i < breakpoints.size(); ++i) {
            if (!(breakpoints[i] > 0.0 && breakpoints[i] < 1.0) || (i > 0 && !(breakpoints[i] > breakpoints[i - 1])))
                throw Error(ErrorCode::invalid_argument, "density breakpoints must increase strictly inside (0, 1)");
        }
        for (double v : values)
            if (!(v > 0.0) || !std::isfinite(v))
                throw Error(ErrorCode::invalid_argument, "density values must be positive");
    }

    /// Mean density over [s0, s1] ⊂ [0, 1].
    double average(double s0, double s1) const
    {
        double mass = 0.0;
        double left = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double right = i < breakpoints.size() ? breakpoints[i] : 1.0;
            const double lo = std::max(left, s0);
            const double hi = std::min(right, s1);
            if (hi > lo) mass += values[i] * (hi - lo);
            left = right;
        }
        return mass / (s1 - s0);
    }

    /// ∫₀¹ √density.
    double sqrt_integral() const
    {
        double sum = 0.0;
        double left = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double right = i < breakpoints.size() ? breakpoints[i] : 1.0;
            sum += std::sqrt(values[i]) * (right - left);
            left = right;
        }
        return sum;
    }
};

/// Dendrite discretized as a cable tree: conductance = 1 / length on every
/// edge, with a piecewise-constant mass density per edge.
class MetricTree {
public:
    MetricTree(ResistanceNetwork net, std::vector<double> lengths, std::vector<double> densities,
               std::vector<std::size_t> branch, std::vector<double> arc, std::vector<std::size_t> terminals)
        : net_(std::move(net)),
          length_(std::move(lengths)),
          density_(std::move(densities)),
          branch_(std::move(branch)),
          arc_(std::move(arc)),
          terminals_(std::move(terminals))
    {
        if (net_.num_edges() + 1 != net_.num_vertices())
            throw Error(ErrorCode::invalid_argument, "a metric tree needs |E| = |V| - 1");
        if (length_.size() != net_.num_edges() || density_.size() != net_.num_edges())
            throw Error(ErrorCode::index_mismatch, "edge lengths and densities must be given per edge");
        if (branch_.size() != net_.num_vertices() || arc_.size() != net_.num_vertices())
            throw Error(ErrorCode::index_mismatch, "embedding must be given per vertex");
        for (std::size_t e = 0; e < net_.num_edges(); ++e) {
            if (!(length_[e] > 0.0) || !(density_[e] > 0.0))
                throw Error(ErrorCode::invalid_argument, "edge lengths and densities must be positive");
            const double c = net_.edge(e).conductance;
            if (std::abs(c * length_[e] - 1.0) > 1e-12)
                throw Error(ErrorCode::invalid_argument, "cable convention violated: conductance != 1/length");
        }
        for (auto t : terminals_)
            if (t >= net_.num_vertices()) throw Error(ErrorCode::unknown_vertex, "terminal out of range");
    }

    const ResistanceNetwork& network() const noexcept { return net_; }
    double edge_length(std::size_t e) const { return length_.at(e); }
    double edge_density(std::size_t e) const { return density_.at(e); }
    std::size_t branch(std::size_t v) const { return branch_.at(v); }
    double arc_coordinate(std::size_t v) const { return arc_.at(v); }
    /// Distinguished vertices: path ends, or the hub followed by the tips of a star.
    const std::vector<std::size_t>& terminals() const noexcept { return terminals_; }

    /// Each vertex receives density × half the length of every incident edge.
    MeasureVector lumped_measure() const
    {
        Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net_.num_vertices()));
        for (std::size_t e = 0; e < net_.num_edges(); ++e) {
            const double half = 0.5 * density_[e] * length_[e];
            w[static_cast<Eigen::Index>(net_.edge(e).tail)] += half;
            w[static_cast<Eigen::Index>(net_.edge(e).head)] += half;
        }
        return MeasureVector(std::move(w));
    }

    /// Edge indices along the unique path from x to y, in order.
    std::vector<std::size_t> edge_path(std::size_t x, std::size_t y) const
    {
        const std::size_t n = net_.num_vertices();
        if (x >= n || y >= n) throw Error(ErrorCode::unknown_vertex, "vertex not in tree");
        std::vector<std::size_t> parent_edge(n, net_.num_edges());
        std::vector<char> seen(n, 0);
        std::vector<std::size_t> queue{y};
        seen[y] = 1;
        for (std::size_t i = 0; i < queue.size(); ++i) {
            const auto u = queue[i];
            for (auto e : net_.incident(u)) {
                const auto w = net_.other_end(e, u);
                if (!seen[w]) {
                    seen[w] = 1;
                    parent_edge[w] = e;
                    queue.push_back(w);
                }
            }
        }
        std::vector<std::size_t> path;
        for (std::size_t v = x; v != y;) {
            const auto e = parent_edge[v];
            path.push_back(e);
            v = net_.other_end(e, v);
        }
        return path;
    }

    std::vector<std::size_t> vertex_path(std::size_t x, std::size_t y) const
    {
        std::vector<std::size_t> out{x};
        for (auto e : edge_path(x, y)) out.push_back(net_.other_end(e, out.back()));
        return out;
    }

private:
    ResistanceNetwork net_;
    std::vector<double> length_;
    std::vector<double> density_;
    std::vector<std::size_t> branch_;
    std::vector<double> arc_;
    std::vector<std::size_t> terminals_;
};

/// Path of k equal segments on [0, total_length]; vertices x0 … xk.
inline MetricTree build_path(std::size_t k, double total_length, const DensityProfile& density = DensityProfile::uniform())
{
    if (k == 0) throw Error(ErrorCode::invalid_argument, "path needs at least one segment");
    if (!(total_length > 0.0) || !std::isfinite(total_length))
        throw Error(ErrorCode::invalid_argument, "path length must be positive");
    density.validate();
    std::vector<std::string> ids;
    std::vector<std::size_t> branch(k + 1, 0);
    std::vector<double> arc;
    for (std::size_t i = 0; i <= k; ++i) {
        ids.push_back("x" + std::to_string(i));
        arc.push_back(total_length * static_cast<double>(i) / static_cast<double>(k));
    }
    const double h = total_length / static_cast<double>(k);
    std::vector<Edge> edges;
    std::vector<double> lengths, densities;
    for (std::size_t i = 0; i < k; ++i) {
        edges.push_back({i, i + 1, 1.0 / h});
        lengths.push_back(h);
        densities.push_back(density.average(static_cast<double>(i) / static_cast<double>(k),
                                            static_cast<double>(i + 1) / static_cast<double>(k)));
    }
    auto net = ResistanceNetwork::from_edges(std::move(ids), edges);
    return MetricTree(std::move(net), std::move(lengths), std::move(densities), std::move(branch), std::move(arc),
                      {0, k});
}

/// N unit branches [p, q_n] glued at the hub p, k segments each, branch n
/// carrying density a_n. Vertex ids: p, b<n>.<j>, q<n>.
inline MetricTree build_star(std::size_t branches, std::size_t k, std::span<const double> a)
{
    if (branches < 2) throw Error(ErrorCode::invalid_argument, "star needs at least two branches");
    if (k == 0) throw Error(ErrorCode::invalid_argument, "star branches need at least one segment");
    if (a.size() != branches) throw Error(ErrorCode::invalid_argument, "star needs one density per branch");
    for (double v : a)
        if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::invalid_argument, "branch densities must be positive");

    std::vector<std::string> ids{"p"};
    std::vector<std::size_t> branch{0};
    std::vector<double> arc{0.0};
    std::vector<Edge> edges;
    std::vector<double> lengths, densities;
    std::vector<std::size_t> terminals{0};
    const double h = 1.0 / static_cast<double>(k);
    for (std::size_t n = 1; n <= branches; ++n) {
        std::size_t prev = 0;
        for (std::size_t j = 1; j <= k; ++j) {
            const std::size_t v = ids.size();
            ids.push_back(j == k ? "q" + std::to_string(n) : "b" + std::to_string(n) + "." + std::to_string(j));
            branch.push_back(n);
            arc.push_back(static_cast<double>(j) * h);
            edges.push_back({prev, v, static_cast<double>(k)});
            lengths.push_back(h);
            densities.push_back(a[n - 1]);
            prev = v;
        }
        terminals.push_back(prev);
    }
    auto net = ResistanceNetwork::from_edges(std::move(ids), edges);
    return MetricTree(std::move(net), std::move(lengths), std::move(densities), std::move(branch), std::move(arc),
                      std::move(terminals));
}

// ---------------------------------------------------------------------------
// Harmonic extension

/// Minimizer of E with the values on `fixed` prescribed.
inline FunctionVector harmonic_extension(const ResistanceNetwork& net, std::span<const std::size_t> fixed,
                                         std::span<const double> values)
{
    if (fixed.size() != values.size())
        throw Error(ErrorCode::invalid_argument, "one boundary value per fixed vertex");
    if (fixed.empty()) throw Error(ErrorCode::invalid_argument, "harmonic extension needs boundary vertices");
    const std::size_t n = net.num_vertices();
    std::vector<long> slot(n, -1);
    FunctionVector f = FunctionVector::Zero(static_cast<Eigen::Index>(n));
    std::vector<char> is_fixed(n, 0);
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        if (fixed[i] >= n) throw Error(ErrorCode::unknown_vertex, "boundary vertex out of range");
        is_fixed[fixed[i]] = 1;
        f[static_cast<Eigen::Index>(fixed[i])] = values[i];
    }
    long m = 0;
    for (std::size_t v = 0; v < n; ++v)
        if (!is_fixed[v]) slot[v] = m++;
    if (m == 0) return f;

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (const auto& e : net.edges()) {
        const long st = slot[e.tail];
        const long sh = slot[e.head];
        const double c = e.conductance;
        if (st >= 0) trip.emplace_back(st, st, c);
        if (sh >= 0) trip.emplace_back(sh, sh, c);
        if (st >= 0 && sh >= 0) {
            trip.emplace_back(st, sh, -c);
            trip.emplace_back(sh, st, -c);
        } else if (st >= 0) {
            rhs[st] += c * f[static_cast<Eigen::Index>(e.head)];
        } else if (sh >= 0) {
            rhs[sh] += c * f[static_cast<Eigen::Index>(e.tail)];
        }
    }
    Eigen::SparseMatrix<double> a(m, m);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(a);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::solver_failure, "dirichlet problem is singular");
    const Eigen::VectorXd x = llt.solve(rhs);
    for (std::size_t v = 0; v < n; ++v)
        if (slot[v] >= 0) f[static_cast<Eigen::Index>(v)] = x[slot[v]];
    return f;
}

// ---------------------------------------------------------------------------
// Sierpinski gasket approximations

/// Level-n graph approximation of the gasket with conductances (5/3)^n.
struct GasketApprox {
    int level = 0;
    ResistanceNetwork network;
    std::array<std::size_t, 3> boundary{};
    std::vector<std::array<std::size_t, 3>> cells;
};

inline constexpr int kGasketIdResolution = 24;

inline std::size_t gasket_vertex_count(int level)
{
    std::size_t p = 1;
    for (int i = 0; i <= level; ++i) p *= 3;
    return (p + 3) / 2;
}

/// Vertex ids encode lattice coordinates at a fixed resolution, so V_n keeps
/// the same ids inside V_{n+1}.
inline GasketApprox build_gasket(int level, int max_level = 7)
{
    if (level < 0) throw Error(ErrorCode::invalid_argument, "gasket level must be nonnegative");
    if (max_level > kGasketIdResolution) max_level = kGasketIdResolution;
    if (level > max_level)
        throw Error(ErrorCode::invalid_argument,
                    "gasket level " + std::to_string(level) + " exceeds the maximum " + std::to_string(max_level));

    using Point = std::array<std::int64_t, 2>;
    const std::int64_t side = std::int64_t{1} << level;
    std::vector<std::array<Point, 3>> cells{{Point{0, 0}, Point{side, 0}, Point{0, side}}};
    for (int l = 0; l < level; ++l) {
        std::vector<std::array<Point, 3>> next;
        next.reserve(cells.size() * 3);
        for (const auto& c : cells) {
            auto mid = [](const Point& a, const Point& b) { return Point{(a[0] + b[0]) / 2, (a[1] + b[1]) / 2}; };
            const Point m01 = mid(c[0], c[1]);
            const Point m02 = mid(c[0], c[2]);
            const Point m12 = mid(c[1], c[2]);
            next.push_back({c[0], m01, m02});
            next.push_back({m01, c[1], m12});
            next.push_back({m02, m12, c[2]});
        }
        cells = std::move(next);
    }

    std::map<Point, std::size_t> index;
    std::vector<std::string> ids;
    const int shift = kGasketIdResolution - level;
    auto vertex = [&](const Point& p) {
        auto [it, inserted] = index.emplace(p, ids.size());
        if (inserted) ids.push_back("g" + std::to_string(p[0] << shift) + "," + std::to_string(p[1] << shift));
        return it->second;
    };
    GasketApprox g;
    g.level = level;
    g.boundary = {vertex(cells.front()[0]), vertex(Point{side, 0}), vertex(Point{0, side})};
    std::vector<Edge> edges;
    const double c = std::pow(5.0 / 3.0, level);
    for (const auto& cell : cells) {
        const std::array<std::size_t, 3> v{vertex(cell[0]), vertex(cell[1]), vertex(cell[2])};
        g.cells.push_back(v);
        edges.push_back({v[0], v[1], c});
        edges.push_back({v[0], v[2], c});
        edges.push_back({v[1], v[2], c});
    }
    g.network = ResistanceNetwork::from_edges(std::move(ids), edges);
    if (g.network.num_vertices() != gasket_vertex_count(level))
        throw Error(ErrorCode::internal, "gasket vertex count mismatch");
    return g;
}

inline FunctionVector harmonic_extension(const GasketApprox& g, const std::array<double, 3>& boundary_values)
{
    return harmonic_extension(g.network, g.boundary, boundary_values);
}

/// Energy-orthonormal harmonic pair obtained by Gram–Schmidt from the
/// extensions of (1,0,0) and (0,1,0).
struct HarmonicPair {
    FunctionVector h1;
    FunctionVector h2;
};

inline HarmonicPair energy_orthonormal_harmonics(const GasketApprox& g)
{
    FunctionVector h1 = harmonic_extension(g, {1.0, 0.0, 0.0});
    FunctionVector h2 = harmonic_extension(g, {0.0, 1.0, 0.0});
    h1 /= std::sqrt(energy(g.network, h1));
    h2 -= energy(g.network, h2, h1) * h1;
    h2 /= std::sqrt(energy(g.network, h2));
    return {std::move(h1), std::move(h2)};
}

/// ν = Γ(h1) + Γ(h2).
inline MeasureVector kusuoka_measure(const GasketApprox& g)
{
    const auto [h1, h2] = energy_orthonormal_harmonics(g);
    return MeasureVector(energy_measure(g.network, h1) + energy_measure(g.network, h2));
}

/// Kusuoka mass carried by the three edges of each level-n cell.
inline std::vector<double> kusuoka_cell_masses(const GasketApprox& g)
{
    const auto [h1, h2] = energy_orthonormal_harmonics(g);
    std::vector<double> out;
    const double c = std::pow(5.0 / 3.0, g.level);
    for (const auto& cell : g.cells) {
        double mass = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                const auto a = static_cast<Eigen::Index>(cell[i]);
                const auto b = static_cast<Eigen::Index>(cell[j]);
                mass += c * ((h1[a] - h1[b]) * (h1[a] - h1[b]) + (h2[a] - h2[b]) * (h2[a] - h2[b]));
            }
        out.push_back(mass);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coordinate sequences and energy dominant measures

struct CoordinateSequence {
    std::vector<FunctionVector> functions;
};

inline std::vector<FunctionVector> indicator_seeds(const ResistanceNetwork& net)
{
    std::vector<FunctionVector> out;
    for (std::size_t v = 0; v < net.num_vertices(); ++v) out.push_back(indicator(net, v));
    return out;
}

/// First vertex pair not separated by any function, if there is one.
inline std::optional<std::pair<std::size_t, std::size_t>> first_unseparated_pair(const ResistanceNetwork& net,
                                                                                 std::span<const FunctionVector> fs)
{
    const std::size_t n = net.num_vertices();
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = x + 1; y < n; ++y) {
            bool separated = false;
            for (const auto& f : fs) {
                const double a = f[static_cast<Eigen::Index>(x)];
                const double b = f[static_cast<Eigen::Index>(y)];
                if (std::abs(a - b) > 1e-14 * std::max({1.0, std::abs(a), std::abs(b)})) {
                    separated = true;
                    break;
                }
            }
            if (!separated) return std::pair{x, y};
        }
    return std::nullopt;
}

/// Scales every nonconstant seed to unit energy and checks point separation
/// over all vertex pairs.
inline CoordinateSequence build_coordinate_sequence(const ResistanceNetwork& net, std::vector<FunctionVector> seeds)
{
    for (auto& f : seeds) {
        require_vertex_function(net, f, "seed function");
        const double e = energy(net, f);
        if (e > 0.0) f /= std::sqrt(e);
    }
    if (auto pair = first_unseparated_pair(net, seeds))
        throw Error(ErrorCode::precondition, "non-separating coordinate seeds: vertices " + net.id(pair->first) +
                                                 " and " + net.id(pair->second) + " are not separated");
    return CoordinateSequence{std::move(seeds)};
}

inline CoordinateSequence build_coordinate_sequence(const ResistanceNetwork& net)
{
    return build_coordinate_sequence(net, indicator_seeds(net));
}

/// m0 = Σ_{E(f_n) > 0} a_n Γ(f_n), with Σ a_n ≤ 1.
inline MeasureVector build_m0(const ResistanceNetwork& net, const CoordinateSequence& coords, std::span<const double> a)
{
    if (a.size() != coords.functions.size())
        throw Error(ErrorCode::invalid_argument, "one weight per coordinate function");
    double total = 0.0;
    for (double v : a) {
        if (!(v > 0.0)) throw Error(ErrorCode::invalid_argument, "coordinate weights must be positive");
        total += v;
    }
    if (total > 1.0 + 1e-12)
        throw Error(ErrorCode::precondition, "coordinate weights sum to " + std::to_string(total) + " > 1");
    Eigen::VectorXd m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.num_vertices()));
    for (std::size_t k = 0; k < a.size(); ++k) {
        const auto& f = coords.functions[k];
        if (energy(net, f) > 0.0) m += a[k] * energy_measure(net, f);
    }
    for (std::size_t v = 0; v < net.num_vertices(); ++v)
        if (!(m[static_cast<Eigen::Index>(v)] > 0.0))
            throw Error(ErrorCode::precondition, "vertex " + net.id(v) + " carries no coordinate energy");
    return MeasureVector(std::move(m));
}

/// √a_n f_n, which satisfies Γ(√a_n f_n) ≤ m0 vertexwise.
inline CoordinateSequence dominated_coordinates(const CoordinateSequence& coords, std::span<const double> a)
{
    if (a.size() != coords.functions.size())
        throw Error(ErrorCode::invalid_argument, "one weight per coordinate function");
    CoordinateSequence out;
    for (std::size_t k = 0; k < a.size(); ++k) out.functions.push_back(std::sqrt(a[k]) * coords.functions[k]);
    return out;
}

/// True when Γ(f_k)({x}) ≤ m(x)(1 + rel_tol) for every k and x.
inline bool coordinates_dominated(const ResistanceNetwork& net, const CoordinateSequence& coords, const MeasureVector& m,
                                  double rel_tol = 1e-12)
{
    for (const auto& f : coords.functions) {
        const EnergyMeasureVector g = energy_measure(net, f);
        for (std::size_t v = 0; v < net.num_vertices(); ++v)
            if (g[static_cast<Eigen::Index>(v)] > m[v] * (1.0 + rel_tol)) return false;
    }
    return true;
}

}  // namespace dirform

#endif
