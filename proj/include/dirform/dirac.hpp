#ifndef DIRFORM_DIRAC_HPP
#define DIRFORM_DIRAC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dirform/energy.hpp"
#include "dirform/linalg.hpp"
#include "dirform/network.hpp"

namespace dirform {

/// Edge-indexed 1-form; the sign convention follows the network's edge orientation.
using OneForm = Eigen::VectorXd;

/// ⟨ω, η⟩_H = Σ_e c_e ω_e η_e.
inline double form_inner(const ResistanceNetwork& net, const OneForm& omega, const OneForm& eta)
{
    require_edge_function(net, omega, "form");
    require_edge_function(net, eta, "form");
    return (net.conductances().array() * omega.array() * eta.array()).sum();
}

inline double form_norm(const ResistanceNetwork& net, const OneForm& omega)
{
    return std::sqrt(form_inner(net, omega, omega));
}

/// (∂f)_e = f(head) − f(tail).
inline OneForm derivation(const ResistanceNetwork& net, const FunctionVector& f) { return edge_differences(net, f); }

/// (a·ω)_e = ½(a(tail) + a(head)) ω_e, used for both sides of the bimodule.
inline OneForm module_action(const ResistanceNetwork& net, const FunctionVector& a, const OneForm& omega)
{
    require_edge_function(net, omega, "form");
    return edge_averages(net, a).cwiseProduct(omega);
}

inline OneForm module_action_left(const ResistanceNetwork& net, const FunctionVector& a, const OneForm& omega)
{
    return module_action(net, a, omega);
}

inline OneForm module_action_right(const ResistanceNetwork& net, const OneForm& omega, const FunctionVector& a)
{
    return module_action(net, a, omega);
}

/// (∂*ω)(x) = μ(x)⁻¹ Σ_{e∋x} σ(e,x) c_e ω_e, the L²(μ) adjoint of ∂.
inline FunctionVector codifferential(const ResistanceNetwork& net, const MeasureVector& mu, const OneForm& omega)
{
    require_measure(net, mu, "reference measure");
    require_edge_function(net, omega, "form");
    FunctionVector out = FunctionVector::Zero(static_cast<Eigen::Index>(net.num_vertices()));
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
        const auto& edge = net.edge(e);
        const double flow = edge.conductance * omega[static_cast<Eigen::Index>(e)];
        out[static_cast<Eigen::Index>(edge.head)] += flow;
        out[static_cast<Eigen::Index>(edge.tail)] -= flow;
    }
    return out.cwiseQuotient(mu.weights());
}

/// Matrix of ∂* (|V| × |E|).
inline Eigen::MatrixXd codifferential_matrix(const ResistanceNetwork& net, const MeasureVector& mu)
{
    require_measure(net, mu, "reference measure");
    return mu.weights().cwiseInverse().asDiagonal() * net.incidence_matrix().transpose() *
           net.conductances().asDiagonal();
}

struct HodgeDecomposition {
    OneForm exact;        // ∂ potential
    OneForm coclosed;     // in ker ∂*
    FunctionVector potential;  // zero at vertex 0
};

/// ω = ∂g + η with η ⊥ Im ∂ in H. The projection does not depend on μ.
inline HodgeDecomposition hodge_decompose(const ResistanceNetwork& net, const OneForm& omega)
{
    require_edge_function(net, omega, "form");
    const Eigen::VectorXd flow = net.conductances().cwiseProduct(omega);
    const Eigen::VectorXd rhs = net.incidence_matrix().transpose() * flow;
    HodgeDecomposition out;
    out.potential = GroundedLaplacian(net.laplacian(), 0).solve(rhs);
    out.exact = derivation(net, out.potential);
    out.coclosed = omega - out.exact;
    return out;
}

/// Basis of ker ∂* from the fundamental cycles of a BFS spanning tree: the
/// unit current around each cycle, ω_e = ±1/c_e.
inline std::vector<OneForm> cycle_forms(const ResistanceNetwork& net)
{
    const std::size_t n = net.num_vertices();
    std::vector<std::size_t> parent_edge(n, net.num_edges());
    std::vector<std::size_t> depth(n, 0);
    std::vector<char> seen(n, 0), tree_edge(net.num_edges(), 0);
    std::vector<std::size_t> queue{0};
    seen[0] = 1;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const auto u = queue[i];
        for (auto e : net.incident(u)) {
            const auto w = net.other_end(e, u);
            if (seen[w]) continue;
            seen[w] = 1;
            parent_edge[w] = e;
            depth[w] = depth[u] + 1;
            tree_edge[e] = 1;
            queue.push_back(w);
        }
    }
    std::vector<OneForm> out;
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
        if (tree_edge[e]) continue;
        OneForm omega = OneForm::Zero(static_cast<Eigen::Index>(net.num_edges()));
        const auto& edge = net.edge(e);
        // Unit flow tail → head along e, returning head → tail through the tree.
        omega[static_cast<Eigen::Index>(e)] = 1.0 / edge.conductance;
        auto push = [&](std::size_t v, double direction) {
            const auto pe = parent_edge[v];
            const auto parent = net.other_end(pe, v);
            // direction +1: flow v → parent
            const double along = net.edge(pe).tail == v ? 1.0 : -1.0;
            omega[static_cast<Eigen::Index>(pe)] += direction * along / net.edge(pe).conductance;
            return parent;
        };
        std::size_t a = edge.head;
        std::size_t b = edge.tail;
        while (depth[a] > depth[b]) a = push(a, 1.0);
        while (depth[b] > depth[a]) b = push(b, -1.0);
        while (a != b) {
            a = push(a, 1.0);
            b = push(b, -1.0);
        }
        out.push_back(std::move(omega));
    }
    return out;
}

/// D(f, ω) = (∂*ω, ∂f) on C(V) ⊕ H, vectors stored as [f; ω].
class DiracOperator {
public:
    DiracOperator(const ResistanceNetwork& net, const MeasureVector& mu) : net_(net), mu_(mu)
    {
        require_measure(net, mu, "reference measure");
        weights_.resize(static_cast<Eigen::Index>(net.num_vertices() + net.num_edges()));
        weights_ << mu.weights(), net.conductances();
    }

    const ResistanceNetwork& network() const noexcept { return net_; }
    const MeasureVector& measure() const noexcept { return mu_; }
    Eigen::Index vertex_dim() const { return static_cast<Eigen::Index>(net_.num_vertices()); }
    Eigen::Index edge_dim() const { return static_cast<Eigen::Index>(net_.num_edges()); }
    Eigen::Index dimension() const { return weights_.size(); }

    /// Diagonal of the Hilbert-space inner product: [μ; c].
    const Eigen::VectorXd& weights() const noexcept { return weights_; }

    double inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const
    {
        return (weights_.array() * u.array() * v.array()).sum();
    }

    Eigen::VectorXd pack(const FunctionVector& f, const OneForm& omega) const
    {
        require_vertex_function(net_, f, "function part");
        require_edge_function(net_, omega, "form part");
        Eigen::VectorXd out(dimension());
        out << f, omega;
        return out;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& u) const
    {
        if (u.size() != dimension()) throw Error(ErrorCode::index_mismatch, "Dirac operand has the wrong length");
        return pack(codifferential(net_, mu_, u.tail(edge_dim())), derivation(net_, u.head(vertex_dim())));
    }

    Eigen::MatrixXd dense() const
    {
        const Eigen::Index n = vertex_dim();
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dimension(), dimension());
        d.topRightCorner(n, edge_dim()) = codifferential_matrix(net_, mu_);
        d.bottomLeftCorner(edge_dim(), n) = net_.incidence_matrix();
        return d;
    }

    /// W^{1/2} D W^{-1/2} with W = diag(μ, c); symmetric.
    Eigen::MatrixXd symmetrized() const
    {
        const Eigen::VectorXd root = weights_.cwiseSqrt();
        const Eigen::MatrixXd b = root.head(vertex_dim()).cwiseInverse().asDiagonal() *
                                  net_.incidence_matrix().transpose() * root.tail(edge_dim()).asDiagonal();
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(dimension(), dimension());
        s.topRightCorner(vertex_dim(), edge_dim()) = b;
        s.bottomLeftCorner(edge_dim(), vertex_dim()) = b.transpose();
        return s;
    }

private:
    ResistanceNetwork net_;
    MeasureVector mu_;
    Eigen::VectorXd weights_;
};

inline DiracOperator dirac_operator(const ResistanceNetwork& net, const MeasureVector& mu) { return {net, mu}; }

/// Ascending eigenvalues; columns are eigenvectors orthonormal in the weighted product.
struct Spectrum {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

inline Spectrum symmetric_spectrum(const Eigen::MatrixXd& sym, const Eigen::VectorXd& root_weights, const char* what)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (sym + sym.transpose()));
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::solver_failure, std::string("eigensolver failed on the ") + what);
    return {solver.eigenvalues(), root_weights.cwiseInverse().asDiagonal() * solver.eigenvectors()};
}

inline Spectrum dirac_spectrum(const DiracOperator& d)
{
    return symmetric_spectrum(d.symmetrized(), d.weights().cwiseSqrt(), "Dirac operator");
}

/// Δ1 = ∂∂* on H, eigenforms orthonormal in H.
inline Spectrum one_form_laplacian_spectrum(const ResistanceNetwork& net, const MeasureVector& mu)
{
    const Eigen::VectorXd root_c = net.conductances().cwiseSqrt();
    const Eigen::MatrixXd b = mu.weights().cwiseSqrt().cwiseInverse().asDiagonal() *
                              net.incidence_matrix().transpose() * root_c.asDiagonal();
    return symmetric_spectrum(b.transpose() * b, root_c, "one-form laplacian");
}

/// Groups of consecutive sorted values separated by less than `gap`.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters(const Eigen::VectorXd& sorted, double gap)
{
    std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
    Eigen::Index start = 0;
    for (Eigen::Index i = 1; i <= sorted.size(); ++i)
        if (i == sorted.size() || sorted[i] - sorted[i - 1] >= gap) {
            out.emplace_back(start, i);
            start = i;
        }
    return out;
}

/// Orthonormal basis (columns) of the span of the columns of v.
inline Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& v)
{
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(v);
    return qr.householderQ() * Eigen::MatrixXd::Identity(v.rows(), v.cols());
}

/// Sine of the largest principal angle between the column spans of two
/// orthonormal matrices of equal width.
inline double subspace_distance(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v)
{
    const Eigen::MatrixXd residual = v - u * (u.transpose() * v);
    if (residual.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
    return svd.singularValues()[0];
}

struct SpectralRepresentationCheck {
    Eigen::VectorXd computed;        // ascending Dirac spectrum
    Eigen::VectorXd predicted;       // ascending {±√λ_j} ∪ {0, …}
    std::size_t zero_multiplicity = 0;
    std::size_t expected_zero_multiplicity = 0;  // 1 + |E| − |V| + 1
    double eigenvalue_error = 0.0;
    double max_residual = 0.0;       // over v_j, w_j and the kernel basis
    double orthonormality_error = 0.0;
    double max_subspace_sine = 0.0;  // over clusters
    bool pass = false;
};

struct SpectralTolerances {
    double eigenvalue = 1e-9;
    double residual = 1e-8;
    double cluster_gap = 1e-8;
    double orthonormality = 1e-10;
    double subspace = 1e-6;
    double zero = 1e-9;
};

/// Compares the Dirac spectrum against the one built from the generator:
/// v_j = (φ_j, λ_j^{-1/2}∂φ_j)/√2 and w_j = (φ_j, −λ_j^{-1/2}∂φ_j)/√2 with
/// eigenvalues ±√λ_j, plus constants and cycle forms in the kernel.
inline SpectralRepresentationCheck check_spectral_representation(const DiracOperator& d,
                                                                 const SpectralTolerances& tol = {})
{
    const auto& net = d.network();
    const Spectrum dirac = dirac_spectrum(d);
    const auto basis = Generator(net, d.measure()).eigenbasis();
    const Eigen::Index n = d.vertex_dim();
    const Eigen::Index m = d.edge_dim();
    const double scale = std::max(1.0, basis.values.cwiseAbs().maxCoeff());

    std::vector<std::pair<double, Eigen::VectorXd>> predicted;
    Eigen::VectorXd constant = Eigen::VectorXd::Ones(n) / std::sqrt(d.measure().total());
    predicted.emplace_back(0.0, d.pack(constant, OneForm::Zero(m)));
    for (auto& omega : cycle_forms(net)) predicted.emplace_back(0.0, d.pack(FunctionVector::Zero(n), omega));
    for (Eigen::Index j = 0; j < n; ++j) {
        const double lambda = basis.values[j];
        if (lambda <= tol.zero * scale) continue;
        const FunctionVector phi = basis.functions.col(j);
        const OneForm dphi = derivation(net, phi) / std::sqrt(lambda);
        predicted.emplace_back(std::sqrt(lambda), d.pack(phi, dphi) / std::sqrt(2.0));
        predicted.emplace_back(-std::sqrt(lambda), d.pack(phi, -dphi) / std::sqrt(2.0));
    }
    std::stable_sort(predicted.begin(), predicted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    SpectralRepresentationCheck out;
    out.computed = dirac.values;
    out.expected_zero_multiplicity = 1 + net.cycle_rank();
    const double zero_tol = tol.zero * std::max(1.0, dirac.values.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < dirac.values.size(); ++i)
        if (std::abs(dirac.values[i]) <= zero_tol) ++out.zero_multiplicity;

    const auto total = static_cast<std::size_t>(d.dimension());
    if (predicted.size() != total) {
        out.eigenvalue_error = std::numeric_limits<double>::infinity();
        return out;
    }
    out.predicted.resize(d.dimension());
    Eigen::MatrixXd vectors(d.dimension(), d.dimension());
    for (std::size_t i = 0; i < total; ++i) {
        out.predicted[static_cast<Eigen::Index>(i)] = predicted[i].first;
        vectors.col(static_cast<Eigen::Index>(i)) = predicted[i].second;
    }
    out.eigenvalue_error = (out.predicted - out.computed).cwiseAbs().maxCoeff();

    // Cycle forms are not orthonormal among themselves; residuals use them as built.
    for (std::size_t i = 0; i < total; ++i) {
        const Eigen::VectorXd& v = predicted[i].second;
        const Eigen::VectorXd r = d.apply(v) - predicted[i].first * v;
        out.max_residual = std::max(out.max_residual, std::sqrt(d.inner(r, r) / d.inner(v, v)));
    }

    const Eigen::VectorXd root = d.weights().cwiseSqrt();
    Eigen::MatrixXd sym_pred = root.asDiagonal() * vectors;
    const Eigen::MatrixXd sym_comp = root.asDiagonal() * dirac.vectors;
    for (const auto& [lo, hi] : clusters(dirac.values, tol.cluster_gap)) {
        const Eigen::MatrixXd q = orthonormal_basis(sym_pred.middleCols(lo, hi - lo));
        sym_pred.middleCols(lo, hi - lo) = q;
        out.max_subspace_sine = std::max(out.max_subspace_sine, subspace_distance(sym_comp.middleCols(lo, hi - lo), q));
    }
    out.orthonormality_error =
        (sym_pred.transpose() * sym_pred - Eigen::MatrixXd::Identity(d.dimension(), d.dimension())).cwiseAbs().maxCoeff();

    out.pass = out.eigenvalue_error < tol.eigenvalue && out.max_residual < tol.residual &&
               out.zero_multiplicity == out.expected_zero_multiplicity &&
               out.orthonormality_error < tol.orthonormality && out.max_subspace_sine < tol.subspace;
    return out;
}

struct BlockIdentityCheck {
    double square_error = 0.0;    // max |D² − (∂*∂ ⊕ ∂∂*)|
    double spectrum_error = 0.0;  // nonzero spectra of −L and Δ1
    std::size_t nonzero_vertex = 0;
    std::size_t nonzero_edge = 0;
    std::size_t edge_zero_multiplicity = 0;  // expected |E| − |V| + 1
    bool pass = false;
};

/// D² against the blocks (−L) ⊕ Δ1, and the nonzero spectra of the blocks.
inline BlockIdentityCheck check_square_blocks(const DiracOperator& d, double tolerance = 1e-12,
                                              double spectral_tolerance = 1e-9)
{
    const auto& net = d.network();
    const Eigen::MatrixXd dense = d.dense();
    const Eigen::MatrixXd square = dense * dense;
    const Eigen::Index n = d.vertex_dim();
    const Eigen::Index m = d.edge_dim();
    Eigen::MatrixXd blocks = Eigen::MatrixXd::Zero(n + m, n + m);
    blocks.topLeftCorner(n, n) = -Generator(net, d.measure()).matrix();
    blocks.bottomRightCorner(m, m) = net.incidence_matrix() * codifferential_matrix(net, d.measure());

    BlockIdentityCheck out;
    out.square_error = (square - blocks).cwiseAbs().maxCoeff();

    const Eigen::VectorXd lv = Generator(net, d.measure()).eigenbasis().values;
    const Eigen::VectorXd le = one_form_laplacian_spectrum(net, d.measure()).values;
    const double scale = std::max(1.0, lv.cwiseAbs().maxCoeff());
    std::vector<double> pv, pe;
    for (double v : lv)
        if (v > spectral_tolerance * scale) pv.push_back(v);
    for (double v : le) {
        if (v > spectral_tolerance * scale)
            pe.push_back(v);
        else
            ++out.edge_zero_multiplicity;
    }
    out.nonzero_vertex = pv.size();
    out.nonzero_edge = pe.size();
    if (pv.size() == pe.size()) {
        for (std::size_t i = 0; i < pv.size(); ++i) out.spectrum_error = std::max(out.spectrum_error, std::abs(pv[i] - pe[i]));
    } else {
        out.spectrum_error = std::numeric_limits<double>::infinity();
    }
    out.pass = out.square_error < tolerance && out.spectrum_error < spectral_tolerance &&
               out.edge_zero_multiplicity == net.cycle_rank();
    return out;
}

/// Fiber inner products ⟨ω, η⟩_{H_x} = (2 m(x))⁻¹ Σ_{e∋x} c_e ω_e η_e.
class FiberStructure {
public:
    FiberStructure(const ResistanceNetwork& net, const MeasureVector& m) : net_(net), m_(m)
    {
        require_measure(net, m, "energy dominant measure");
    }

    double inner(std::size_t x, const OneForm& omega, const OneForm& eta) const
    {
        double sum = 0.0;
        for (auto e : net_.incident(x))
            sum += net_.edge(e).conductance * omega[static_cast<Eigen::Index>(e)] * eta[static_cast<Eigen::Index>(e)];
        return sum / (2.0 * m_[x]);
    }

    /// ∫ ⟨ω, η⟩_{H_x} m(dx).
    double integrated(const OneForm& omega, const OneForm& eta) const
    {
        double sum = 0.0;
        for (std::size_t x = 0; x < net_.num_vertices(); ++x) sum += m_[x] * inner(x, omega, eta);
        return sum;
    }

    const MeasureVector& measure() const noexcept { return m_; }

private:
    ResistanceNetwork net_;
    MeasureVector m_;
};

/// ½ Σ_x g(x)² Σ_y J(x,y) (f(x) − f(y))² for the jump kernel J(x,y) = c_xy on
/// ordered pairs, so that g = 1 returns E(f).
inline double pair_space_representation(const ResistanceNetwork& net, const FunctionVector& f, const FunctionVector& g)
{
    require_vertex_function(net, f, "f");
    require_vertex_function(net, g, "g");
    double sum = 0.0;
    for (std::size_t x = 0; x < net.num_vertices(); ++x) {
        double inner = 0.0;
        for (auto e : net.incident(x)) {
            const double diff = f[static_cast<Eigen::Index>(x)] - f[static_cast<Eigen::Index>(net.other_end(e, x))];
            inner += net.edge(e).conductance * diff * diff;
        }
        sum += g[static_cast<Eigen::Index>(x)] * g[static_cast<Eigen::Index>(x)] * inner;
    }
    return 0.5 * sum;
}

}  // namespace dirform

#endif
