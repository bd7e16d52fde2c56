#ifndef DIRFORM_CONNES_HPP
#define DIRFORM_CONNES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dirform/barrier.hpp"
#include "dirform/dirac.hpp"
#include "dirform/metrics.hpp"
#include "dirform/report.hpp"

namespace dirform {

/// π(a) = a ⊕ (average of a) acting on C(V) ⊕ H.
inline Eigen::MatrixXd multiplication_operator(const DiracOperator& d, const FunctionVector& a)
{
    Eigen::VectorXd diag(d.dimension());
    diag << a, edge_averages(d.network(), a);
    return diag.asDiagonal();
}

/// [D, a] assembled as D·π(a) − π(a)·D.
inline Eigen::MatrixXd commutator(const DiracOperator& d, const FunctionVector& a)
{
    require_vertex_function(d.network(), a, "a");
    const Eigen::MatrixXd dense = d.dense();
    const Eigen::MatrixXd m = multiplication_operator(d, a);
    return dense * m - m * dense;
}

/// K: f ↦ f̄ ∂a (edge average times the derivative of a), |E| × |V|.
inline Eigen::MatrixXd commutator_block(const ResistanceNetwork& net, const FunctionVector& a)
{
    const Eigen::VectorXd da = derivation(net, a);
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(net.num_edges()),
                                              static_cast<Eigen::Index>(net.num_vertices()));
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
        const auto i = static_cast<Eigen::Index>(e);
        k(i, static_cast<Eigen::Index>(net.edge(e).tail)) += 0.5 * da[i];
        k(i, static_cast<Eigen::Index>(net.edge(e).head)) += 0.5 * da[i];
    }
    return k;
}

/// Closed form [D, a](f, ω) = (−ω*∂a, f·∂a) with (ω*∂a)(x) = (2μ(x))⁻¹ Σ_{e∋x} c_e ω_e (∂a)_e.
inline Eigen::MatrixXd commutator_closed_form(const DiracOperator& d, const FunctionVector& a)
{
    const auto& net = d.network();
    const Eigen::MatrixXd k = commutator_block(net, a);
    const Eigen::Index n = d.vertex_dim();
    const Eigen::Index m = d.edge_dim();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + m, n + m);
    out.bottomLeftCorner(m, n) = k;
    out.topRightCorner(n, m) =
        -(d.measure().weights().cwiseInverse().asDiagonal() * k.transpose() * net.conductances().asDiagonal());
    return out;
}

/// max_v Γ(a)({v}) / μ(v).
inline double gamma_sup(const ResistanceNetwork& net, const MeasureVector& mu, const FunctionVector& a)
{
    return energy_measure_edge(net, a, a).cwiseQuotient(mu.weights()).maxCoeff();
}

struct CommutatorReport {
    FunctionVector a;
    double commutator_norm = 0.0;
    double gamma_sup = 0.0;
    double lower_bound = 0.0;     // gamma_sup / 2
    double assembly_error = 0.0;  // assembled vs closed form, when assembled
    bool upper_ok = false;
    bool lower_ok = false;
    bool pass = false;
};

/// Operator norm of [D, a] in the weighted inner products. In the coordinates
/// W^{1/2}(·) the commutator is [[0, −K̃ᵀ], [K̃, 0]] with K̃ = c^{1/2} K μ^{-1/2},
/// so its norm is the largest singular value of K̃. Networks with at most
/// `assemble_limit` vertices and edges also assemble D·π(a) − π(a)·D densely and
/// take its singular values directly; both routes must agree.
inline CommutatorReport commutator_norm(const DiracOperator& d, const FunctionVector& a, double tolerance = 1e-12,
                                        Eigen::Index assemble_limit = 160)
{
    const auto& net = d.network();
    require_vertex_function(net, a, "a");
    CommutatorReport r;
    r.a = a;
    const Eigen::MatrixXd k = net.conductances().cwiseSqrt().asDiagonal() * commutator_block(net, a) *
                              d.measure().weights().cwiseSqrt().cwiseInverse().asDiagonal();
    r.commutator_norm = k.size() == 0 ? 0.0 : Eigen::BDCSVD<Eigen::MatrixXd>(k).singularValues()[0];
    r.gamma_sup = gamma_sup(net, d.measure(), a);
    r.lower_bound = 0.5 * r.gamma_sup;

    bool assembly_ok = true;
    if (d.dimension() <= assemble_limit) {
        const Eigen::MatrixXd assembled = commutator(d, a);
        const Eigen::MatrixXd closed = commutator_closed_form(d, a);
        const double scale = std::max(1.0, closed.cwiseAbs().maxCoeff());
        r.assembly_error = (assembled - closed).cwiseAbs().maxCoeff();
        const Eigen::VectorXd root = d.weights().cwiseSqrt();
        const Eigen::MatrixXd sym = root.asDiagonal() * assembled * root.cwiseInverse().asDiagonal();
        const double dense_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(sym).singularValues()[0];
        assembly_ok = r.assembly_error <= tolerance * scale &&
                      std::abs(dense_norm - r.commutator_norm) <= 1e-10 * std::max(1.0, r.commutator_norm);
        if (!assembly_ok)
            throw Error(ErrorCode::internal, "commutator routes disagree (assembly error " +
                                                 std::to_string(r.assembly_error) + ")");
    }
    const double sq = r.commutator_norm * r.commutator_norm;
    const double slack = tolerance * std::max(1.0, r.gamma_sup);
    r.upper_ok = sq <= r.gamma_sup + slack;
    r.lower_ok = r.lower_bound <= sq + slack;
    r.pass = r.upper_ok && r.lower_ok && assembly_ok;
    return r;
}

// ---------------------------------------------------------------------------
// Connes distance

/// maximize a(x) − a(y) subject to ‖[D, a]‖ ≤ 1, with a(y) = 0 pinned.
///
/// ‖[D,a]‖ ≤ 1 ⇔ M(a) = diag(μ) − Pᵀ diag(c ∘ (∂a)²) P ⪰ 0 with P the
/// endpoint-averaging matrix; barrier −log det M(a). For Y = M⁻¹/t the
/// Lagrangian gives the bound tr(diag(μ) Y) + R_w(x, y)/4 where
/// w_e = c_e (P Y Pᵀ)_ee.
class ConnesProblem {
public:
    ConnesProblem(const DiracOperator& d, std::size_t x, std::size_t y)
        : net_(d.network()), mu_(d.measure()), x_(x), y_(y), incidence_(net_.incidence_matrix()),
          average_(incidence_.cwiseAbs() * 0.5), c_(net_.conductances())
    {
        const auto n = static_cast<Eigen::Index>(net_.num_vertices());
        std::vector<Eigen::Index> keep;
        for (Eigen::Index v = 0; v < n; ++v)
            if (v != static_cast<Eigen::Index>(y)) keep.push_back(v);
        reduced_incidence_ = incidence_(Eigen::all, keep);
        objective_ = Eigen::VectorXd::Zero(n - 1);
        objective_[static_cast<Eigen::Index>(x) - (x > y ? 1 : 0)] = 1.0;
    }

    Eigen::Index dimension() const { return objective_.size(); }
    const Eigen::VectorXd& objective() const { return objective_; }
    double barrier_degree() const { return static_cast<double>(net_.num_vertices()); }

    FunctionVector expand(const Eigen::VectorXd& z) const
    {
        FunctionVector a(z.size() + 1);
        for (Eigen::Index v = 0, r = 0; v < a.size(); ++v) a[v] = v == static_cast<Eigen::Index>(y_) ? 0.0 : z[r++];
        return a;
    }

    bool barrier(const Eigen::VectorXd& z, BarrierTerms& terms, bool derivs) const
    {
        const Eigen::VectorXd da = reduced_incidence_ * z;
        Eigen::LLT<Eigen::MatrixXd> llt(matrix(da));
        if (llt.info() != Eigen::Success) return false;
        const Eigen::MatrixXd& l = llt.matrixLLT();
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < l.rows(); ++i) {
            if (!(l(i, i) > 0.0)) return false;
            logdet += 2.0 * std::log(l(i, i));
        }
        terms.value = -logdet;
        if (!derivs) return true;
        const Eigen::MatrixXd s = average_ * llt.solve(average_.transpose());  // P M⁻¹ Pᵀ
        const Eigen::VectorXd cd = c_.cwiseProduct(da);
        const Eigen::VectorXd sd = s.diagonal();
        terms.gradient = reduced_incidence_.transpose() * (2.0 * sd.cwiseProduct(cd));
        Eigen::MatrixXd inner = 4.0 * (cd.asDiagonal() * s.cwiseProduct(s) * cd.asDiagonal());
        inner.diagonal() += 2.0 * c_.cwiseProduct(sd);
        terms.hessian = reduced_incidence_.transpose() * inner * reduced_incidence_;
        return true;
    }

    double dual_bound(const Eigen::VectorXd& z, double t) const
    {
        const Eigen::VectorXd da = reduced_incidence_ * z;
        Eigen::LLT<Eigen::MatrixXd> llt(matrix(da));
        if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
        const Eigen::MatrixXd y = llt.solve(Eigen::MatrixXd::Identity(mu_.weights().size(), mu_.weights().size())) / t;
        const Eigen::VectorXd w = c_.cwiseProduct((average_ * y * average_.transpose()).diagonal());
        if (!(w.array() > 0.0).all()) return std::numeric_limits<double>::infinity();
        return mu_.weights().dot(y.diagonal()) + 0.25 * weighted_resistance(net_, w, x_, y_);
    }

    /// diag(μ) − Pᵀ diag(c (∂a)²) P.
    Eigen::MatrixXd matrix(const Eigen::VectorXd& da) const
    {
        const Eigen::VectorXd w = c_.cwiseProduct(da.cwiseAbs2());
        Eigen::MatrixXd m = -(average_.transpose() * w.asDiagonal() * average_);
        m.diagonal() += mu_.weights();
        return m;
    }

private:
    const ResistanceNetwork& net_;
    const MeasureVector& mu_;
    std::size_t x_;
    std::size_t y_;
    Eigen::MatrixXd incidence_;
    Eigen::MatrixXd average_;
    Eigen::VectorXd c_;
    Eigen::MatrixXd reduced_incidence_;
    Eigen::VectorXd objective_;
};

struct ConnesSolution {
    double distance = 0.0;
    double upper_bound = 0.0;
    FunctionVector maximizer;  // pinned to 0 at y
    double commutator_norm = 0.0;
    SolverStats stats;
};

inline BarrierOptions connes_defaults()
{
    BarrierOptions o;
    o.gap_tolerance = 1e-7;
    o.relative_gap = 1e-9;
    return o;
}

inline ConnesSolution connes_distance(const DiracOperator& d, std::size_t x, std::size_t y,
                                      const BarrierOptions& options = connes_defaults())
{
    const auto& net = d.network();
    if (x >= net.num_vertices() || y >= net.num_vertices())
        throw Error(ErrorCode::unknown_vertex, "vertex index out of range");
    ConnesSolution sol;
    if (x == y) {
        sol.maximizer = FunctionVector::Zero(static_cast<Eigen::Index>(net.num_vertices()));
        return sol;
    }
    ConnesProblem problem(d, x, y);
    const BarrierResult r = maximize_linear(problem, options);
    sol.maximizer = problem.expand(r.point);
    sol.distance = r.primal;
    sol.upper_bound = r.upper_bound;
    sol.stats = r.stats;
    sol.commutator_norm = commutator_norm(d, sol.maximizer, 1e-12, 0).commutator_norm;
    if (sol.commutator_norm > 1.0 + 1e-9)
        throw Error(ErrorCode::internal, "Connes maximizer violates the commutator constraint");
    return sol;
}

inline ConnesSolution connes_distance(const DiracOperator& d, std::string_view x, std::string_view y,
                                      const BarrierOptions& options = connes_defaults())
{
    return connes_distance(d, d.network().index_of(x), d.network().index_of(y), options);
}

inline MetricMatrix connes_metric_matrix(const DiracOperator& d, const BarrierOptions& options = connes_defaults())
{
    const Eigen::Index n = d.vertex_dim();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            m(i, j) = m(j, i) =
                connes_distance(d, static_cast<std::size_t>(i), static_cast<std::size_t>(j), options).distance;
    return {MetricKind::connes, m};
}

// ---------------------------------------------------------------------------
// Spectral triple checklist

struct SpectralTripleReport {
    bool faithful = false;
    bool bounded = false;
    bool discrete_spectrum = false;
    Eigen::VectorXd spectrum;                  // eigenvalues of −L, ascending
    std::vector<std::size_t> multiplicities;   // per cluster (gap 1e-8)
    double max_norm_ratio = 0.0;               // max ‖[D,a]‖² / gamma_sup over the samples
    double min_margin = 0.0;                   // min gamma_sup − ‖[D,a]‖²
    std::vector<CommutatorReport> samples;
    bool pass = false;
};

inline SpectralTripleReport verify_spectral_triple(const ResistanceNetwork& net, const MeasureVector& mu,
                                                   int samples = 50, std::uint64_t seed = 1)
{
    const DiracOperator d(net, mu);
    SpectralTripleReport out;

    // Faithfulness on the basis of indicators, and multiplicativity of π on functions.
    out.faithful = true;
    for (std::size_t v = 0; v < net.num_vertices(); ++v) {
        const FunctionVector a = indicator(net, v);
        const Eigen::VectorXd diag = multiplication_operator(d, a).diagonal();
        if (!(diag.cwiseAbs().maxCoeff() > 0.0)) out.faithful = false;
        if ((diag.head(d.vertex_dim()) - a.cwiseProduct(a)).cwiseAbs().maxCoeff() != 0.0) out.faithful = false;
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    out.bounded = true;
    out.min_margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        FunctionVector a(d.vertex_dim());
        for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = normal(rng);
        CommutatorReport r = commutator_norm(d, a);
        const double sq = r.commutator_norm * r.commutator_norm;
        out.max_norm_ratio = std::max(out.max_norm_ratio, r.gamma_sup > 0.0 ? sq / r.gamma_sup : 0.0);
        out.min_margin = std::min(out.min_margin, r.gamma_sup - sq);
        out.bounded = out.bounded && r.upper_ok;
        out.samples.push_back(std::move(r));
    }

    out.spectrum = Generator(net, mu).eigenbasis().values;
    for (const auto& [lo, hi] : clusters(out.spectrum, 1e-8))
        out.multiplicities.push_back(static_cast<std::size_t>(hi - lo));
    bool sorted = true;
    for (Eigen::Index i = 1; i < out.spectrum.size(); ++i) sorted = sorted && out.spectrum[i] >= out.spectrum[i - 1];
    const double scale = std::max(1.0, out.spectrum.cwiseAbs().maxCoeff());
    out.discrete_spectrum = sorted && out.spectrum.allFinite() && std::abs(out.spectrum[0]) <= 1e-9 * scale &&
                            (out.spectrum.size() < 2 || out.spectrum[1] > 1e-9 * scale);
    out.pass = out.faithful && out.bounded && out.discrete_spectrum;
    return out;
}

// ---------------------------------------------------------------------------
// Refinement check d_D → d_{Γ,μ}

struct CoincidenceLevel {
    std::size_t k = 0;
    double connes = 0.0;
    double intrinsic = 0.0;          // tree closed form
    double intrinsic_solver = 0.0;   // convex program on the lumped network
    double gap = 0.0;                // |connes − intrinsic|
    double relative_gap = 0.0;
    double certified_gap = 0.0;
    int iterations = 0;
};

struct CoincidenceReport {
    std::vector<CoincidenceLevel> levels;
    bool monotone = false;
    bool final_within = false;
    double final_tolerance = 0.05;
    bool pass = false;
};

using TreeFactory = std::function<MetricTree(std::size_t k)>;
using TerminalPair = std::function<std::pair<std::size_t, std::size_t>(const MetricTree&)>;

/// Endpoint gap |d_D − d_{Γ,μ}| with μ the lumped measure along a refinement
/// schedule: nonincreasing across the schedule up to the certified solver
/// resolution at each level, below final_tolerance·d_{Γ,μ} at the end.
inline CoincidenceReport metric_coincidence_check(const TreeFactory& factory, const TerminalPair& pair,
                                                  std::span<const std::size_t> schedule, double final_tolerance = 0.05,
                                                  double monotone_slack = 1e-9)
{
    if (schedule.empty()) throw Error(ErrorCode::invalid_argument, "empty refinement schedule");
    CoincidenceReport out;
    out.final_tolerance = final_tolerance;
    for (auto k : schedule) {
        const MetricTree tree = factory(k);
        const MeasureVector mu = tree.lumped_measure();
        const auto [x, y] = pair(tree);
        const DiracOperator d(tree.network(), mu);
        const ConnesSolution c = connes_distance(d, x, y);
        CoincidenceLevel level;
        level.k = k;
        level.connes = c.distance;
        level.intrinsic = intrinsic_metric_tree(tree, x, y);
        level.intrinsic_solver = intrinsic_metric(tree.network(), mu, x, y).distance;
        level.gap = std::abs(level.connes - level.intrinsic);
        level.relative_gap = level.gap / level.intrinsic;
        level.certified_gap = c.stats.certified_gap;
        level.iterations = c.stats.iterations;
        out.levels.push_back(level);
    }
    out.monotone = true;
    for (std::size_t i = 1; i < out.levels.size(); ++i)
        out.monotone = out.monotone && out.levels[i].gap <= out.levels[i - 1].gap + out.levels[i].certified_gap +
                                                               out.levels[i - 1].certified_gap + monotone_slack;
    out.final_within = out.levels.back().relative_gap < final_tolerance;
    out.pass = out.monotone && out.final_within;
    return out;
}

}  // namespace dirform

#endif
