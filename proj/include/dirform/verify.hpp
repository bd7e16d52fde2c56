#ifndef DIRFORM_VERIFY_HPP
#define DIRFORM_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dirform/connes.hpp"
#include "dirform/dirac.hpp"
#include "dirform/inequalities.hpp"
#include "dirform/metrics.hpp"
#include "dirform/random.hpp"
#include "dirform/spaces.hpp"

namespace dirform {

struct SuiteOptions {
    std::uint64_t seed = 1;
    int random_instances = 10;    // per randomized family
    int commutator_samples = 50;
    std::size_t solver_vertex_limit = 100;  // skip all-pairs convex solves above this size
};

struct SuiteReport {
    std::vector<Report> checks;
    bool pass() const { return all_pass(checks); }
};

namespace detail {

inline Report flag_report(std::string name, bool ok) { return Report{std::move(name), ok ? 0.0 : 1.0, 0.0, 0.0, ok}; }

/// Runs `body`, turning a library error into a failed report of the same name.
template <class F>
void guarded(std::vector<Report>& out, const std::string& name, F&& body)
{
    try {
        body();
    } catch (const Error& e) {
        out.push_back(Report{name + " [" + to_string(e.code()) + ": " + e.what() + "]", 1.0, 0.0, 0.0, false});
    }
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace detail

/// Energy measure, resistance and trace invariants on one network.
inline void network_properties(const ResistanceNetwork& net, std::mt19937_64& rng, std::vector<Report>& out)
{
    const std::size_t n = net.num_vertices();
    detail::guarded(out, "network:energy-measure", [&] {
        double route = 0.0, mass = 0.0;
        for (int s = 0; s < 5; ++s) {
            const FunctionVector f = random_function(rng, n);
            const auto a = energy_measure_edge(net, f, f);
            const auto b = energy_measure_from_form(net, f, f);
            route = std::max(route, (a - b).cwiseAbs().maxCoeff() / (1.0 + a.cwiseAbs().maxCoeff()));
            mass = std::max(mass, std::abs(a.sum() - energy(net, f)) / (1.0 + energy(net, f)));
        }
        out.push_back(bound_report("network:energy-measure-routes", route, 0.0, 1e-12));
        out.push_back(bound_report("network:energy-measure-mass", mass, 0.0, 1e-12));
    });
    detail::guarded(out, "network:approx-gamma", [&] {
        std::bernoulli_distribution coin(0.5);
        double worst = -1e300;
        for (int s = 0; s < 5; ++s) {
            const FunctionVector f = random_function(rng, n);
            const FunctionVector g = random_function(rng, n);
            const auto gf = energy_measure_edge(net, f, f);
            const auto gg = energy_measure_edge(net, g, g);
            const double bound = std::sqrt(energy(net, f - g));
            for (int t = 0; t < 8; ++t) {
                double af = 0.0, ag = 0.0;
                for (std::size_t v = 0; v < n; ++v)
                    if (coin(rng)) {
                        af += gf[static_cast<Eigen::Index>(v)];
                        ag += gg[static_cast<Eigen::Index>(v)];
                    }
                worst = std::max(worst, std::abs(std::sqrt(std::max(af, 0.0)) - std::sqrt(std::max(ag, 0.0))) - bound);
            }
        }
        out.push_back(bound_report("network:approx-gamma", worst, 0.0, 1e-10));
    });
    detail::guarded(out, "network:resistance", [&] {
        const MetricMatrix r = resistance_metric(net);
        const auto violation = r.axiom_violation(1e-10);
        out.push_back(detail::flag_report("network:resistance-metric-axioms", !violation));
        const FunctionVector u = random_function(rng, n);
        const double e = energy(net, u);
        double worst = -1e300;
        for (std::size_t x = 0; x < n; ++x)
            for (std::size_t y = x + 1; y < n; ++y) {
                const double d = u[static_cast<Eigen::Index>(x)] - u[static_cast<Eigen::Index>(y)];
                worst = std::max(worst, d * d - r(x, y) * e);
            }
        out.push_back(bound_report("network:resistance-estimate", worst, 0.0, 1e-10));

        std::vector<std::string> boundary;
        for (std::size_t v = 0; v < n; v += std::max<std::size_t>(1, n / 4)) boundary.push_back(net.id(v));
        if (boundary.size() < 2) boundary.push_back(net.id(n - 1));
        const ResistanceNetwork reduced = trace_to_subset(net, boundary);
        const MetricMatrix rr = resistance_metric(reduced);
        double err = 0.0;
        for (std::size_t i = 0; i < reduced.num_vertices(); ++i)
            for (std::size_t j = 0; j < reduced.num_vertices(); ++j)
                err = std::max(err, std::abs(rr(i, j) - r(net.index_of(reduced.id(i)), net.index_of(reduced.id(j)))));
        out.push_back(bound_report("network:trace-preserves-resistance", err, 0.0, 1e-10));
    });
}

/// Contraction and product inequalities with the contraction catalog on random data.
inline void inequality_properties(const ResistanceNetwork& net, std::mt19937_64& rng, std::vector<Report>& out)
{
    const std::size_t n = net.num_vertices();
    detail::guarded(out, "inequalities", [&] {
        std::uniform_real_distribution<double> unit(0.0, 2.0);
        for (const auto& contraction : contraction_catalog(3)) {
            std::vector<FunctionVector> fs;
            for (std::size_t i = 0; i < contraction.arity(); ++i) fs.push_back(random_function(rng, n));
            FunctionVector h(static_cast<Eigen::Index>(n));
            for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = unit(rng);
            out.push_back(check_contraction_inequality(net, contraction, fs, h));
        }
        const auto product = check_product_inequality(net, random_function(rng, n), random_function(rng, n));
        double worst = -1e300;
        bool ok = true;
        for (const auto& r : product) {
            worst = std::max(worst, r.lhs - r.rhs);
            ok = ok && r.pass;
        }
        out.push_back(Report{"product:all-sets", worst, 0.0, 1e-12, ok});
    });
}

/// First-order calculus and Dirac operator identities.
inline void dirac_properties(const ResistanceNetwork& net, const MeasureVector& mu, std::mt19937_64& rng,
                             std::vector<Report>& out)
{
    const std::size_t n = net.num_vertices();
    const std::size_t m = net.num_edges();
    detail::guarded(out, "dirac", [&] {
        const DiracOperator d(net, mu);
        const Eigen::MatrixXd star = codifferential_matrix(net, mu);
        // ⟨∂*ω, f⟩_μ − ⟨ω, ∂f⟩_H over the standard bases.
        const Eigen::MatrixXd adj = star.transpose() * mu.weights().asDiagonal() -
                                    net.conductances().asDiagonal() * net.incidence_matrix();
        out.push_back(bound_report("dirac:adjointness", detail::max_abs(adj), 0.0, 1e-12));
        const Eigen::MatrixXd fact = star * net.incidence_matrix() + Generator(net, mu).matrix();
        out.push_back(bound_report("dirac:factorization", detail::max_abs(fact), 0.0, 1e-12));

        const FunctionVector a = random_function(rng, n);
        const FunctionVector f = random_function(rng, n);
        const OneForm lhs = derivation(net, a.cwiseProduct(f));
        const OneForm rhs = module_action(net, a, derivation(net, f)) + module_action(net, f, derivation(net, a));
        out.push_back(bound_report("dirac:leibniz", detail::max_abs(lhs - rhs), 0.0, 1e-14 * (1.0 + detail::max_abs(lhs))));
        const OneForm omega = random_function(rng, m);
        out.push_back(bound_report("dirac:action-bound", form_norm(net, module_action(net, a, omega)),
                                   a.cwiseAbs().maxCoeff() * form_norm(net, omega), 1e-12));

        const HodgeDecomposition h = hodge_decompose(net, omega);
        const double w2 = form_inner(net, omega, omega);
        out.push_back(bound_report("dirac:hodge-orthogonality", std::abs(form_inner(net, h.exact, h.coclosed)), 0.0,
                                   1e-12 * w2));
        out.push_back(bound_report("dirac:hodge-coclosed",
                                   codifferential(net, mu, h.coclosed).cwiseAbs().maxCoeff(), 0.0, 1e-10 * (1.0 + w2)));
        out.push_back(bound_report("dirac:hodge-sum", detail::max_abs(h.exact + h.coclosed - omega), 0.0, 1e-12 * (1.0 + w2)));

        const auto rep = check_spectral_representation(d);
        out.push_back(Report{"dirac:spectral-representation", rep.eigenvalue_error, 0.0, 1e-9, rep.pass});
        out.push_back(equality_report("dirac:kernel-dimension", static_cast<double>(rep.zero_multiplicity),
                                      static_cast<double>(1 + net.cycle_rank()), 0.0));
        const auto blocks = check_square_blocks(d);
        out.push_back(Report{"dirac:square-blocks", blocks.square_error, 0.0, 1e-12, blocks.pass});

        const FiberStructure fiber(net, mu);
        const OneForm eta = random_function(rng, m);
        out.push_back(equality_report("dirac:fiber-integral", fiber.integrated(omega, eta), form_inner(net, omega, eta),
                                      1e-12 * (1.0 + std::abs(form_inner(net, omega, eta)))));
        const FunctionVector g = random_function(rng, n);
        const auto gamma = energy_measure_edge(net, f, g);
        double fiber_err = 0.0;
        for (std::size_t x = 0; x < n; ++x)
            fiber_err = std::max(fiber_err, std::abs(fiber.inner(x, derivation(net, f), derivation(net, g)) -
                                                     gamma[static_cast<Eigen::Index>(x)] / mu[x]));
        out.push_back(bound_report("dirac:fiber-energy-density", fiber_err, 0.0, 1e-12));
        out.push_back(equality_report("dirac:pair-space-total", pair_space_representation(net, f, FunctionVector::Ones(n)),
                                      energy(net, f), 1e-12 * (1.0 + energy(net, f))));

        auto flags = std::make_unique<bool[]>(m);
        std::bernoulli_distribution coin(0.5);
        for (std::size_t e = 0; e < m; ++e) flags[e] = coin(rng);
        const std::span<const bool> flips(flags.get(), m);
        const ResistanceNetwork flipped = net.reoriented(flips);
        const Eigen::VectorXd s0 = dirac_spectrum(d).values;
        const Eigen::VectorXd s1 = dirac_spectrum(DiracOperator(flipped, mu)).values;
        out.push_back(bound_report("dirac:orientation-covariance", detail::max_abs(s0 - s1), 0.0, 1e-10));
    });
}

inline void connes_properties(const ResistanceNetwork& net, const MeasureVector& mu, const SuiteOptions& opt,
                              std::vector<Report>& out)
{
    detail::guarded(out, "connes", [&] {
        const auto triple = verify_spectral_triple(net, mu, opt.commutator_samples, opt.seed);
        out.push_back(detail::flag_report("connes:faithful", triple.faithful));
        out.push_back(Report{"connes:commutator-bounded", triple.max_norm_ratio, 1.0, 1e-12, triple.bounded});
        out.push_back(detail::flag_report("connes:discrete-spectrum", triple.discrete_spectrum));
        bool bracket = true;
        double worst_lower = 1e300;
        for (const auto& s : triple.samples) {
            bracket = bracket && s.pass;
            if (s.gamma_sup > 0.0) worst_lower = std::min(worst_lower, s.commutator_norm * s.commutator_norm / s.gamma_sup);
        }
        out.push_back(Report{"connes:bracket", worst_lower, 0.5, 1e-12, bracket});
    });
}

inline void metric_properties(const ResistanceNetwork& net, const MeasureVector& m, const SuiteOptions& opt,
                              std::vector<Report>& out)
{
    const std::size_t n = net.num_vertices();
    detail::guarded(out, "metrics", [&] {
        const MetricMatrix root = sqrt_resistance_metric(net);
        out.push_back(detail::flag_report("metrics:sqrt-resistance-axioms", !root.axiom_violation()));
        const std::size_t x = 0, y = n - 1;
        const double d1 = intrinsic_metric(net, m, x, y).distance;
        const double d4 = intrinsic_metric(net, m.scaled(4.0), x, y).distance;
        out.push_back(equality_report("metrics:intrinsic-scaling", d4, 2.0 * d1, 1e-7 * (1.0 + d1)));
        if (n <= opt.solver_vertex_limit / 4) {
            const MetricMatrix intrinsic = intrinsic_metric_matrix(net, m);
            out.push_back(detail::flag_report("metrics:intrinsic-axioms", !intrinsic.axiom_violation(1e-7)));
            const MetricMatrix path = path_length_metric(intrinsic, net);
            double dominance = -1e300;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) dominance = std::max(dominance, intrinsic(i, j) - path(i, j));
            out.push_back(bound_report("metrics:path-length-dominates", dominance, 0.0, 1e-12));
        }
    });
}

/// Thm-3.2 chain on seeded random networks under its preconditions.
inline void chain_properties(std::mt19937_64& rng, const SuiteOptions& opt, std::vector<Report>& out)
{
    detail::guarded(out, "metrics:chain", [&] {
        bool ok = true;
        double worst = -1e300;
        for (int s = 0; s < opt.random_instances; ++s) {
            const ResistanceNetwork net = random_network(rng, {2, 6, 0.3, 0.2, 5.0});
            const CoordinateSequence coords = build_coordinate_sequence(net);
            const std::vector<double> a(coords.functions.size(), 1.0 / static_cast<double>(coords.functions.size()));
            const MeasureVector m0 = build_m0(net, coords, a);
            const ChainReport chain = compare_metric_chain(net, m0, dominated_coordinates(coords, a));
            ok = ok && chain.pass;
            for (const auto& r : chain.checks) worst = std::max(worst, r.lhs - r.rhs);
        }
        out.push_back(Report{"metrics:chain", worst, 0.0, 1e-6, ok});
    });
}

inline void tree_properties(const MetricTree& tree, const SuiteOptions& opt, std::vector<Report>& out)
{
    detail::guarded(out, "tree", [&] {
        const auto& t = tree.terminals();
        std::vector<Triple> triples;
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = i + 1; j < t.size(); ++j) {
                const auto path = tree.vertex_path(t[i], t[j]);
                triples.push_back({t[i], path[path.size() / 2], t[j]});
            }
        if (triples.size() > 6) triples.resize(6);
        const bool solve = tree.network().num_vertices() <= opt.solver_vertex_limit;
        for (auto& r : dendrite_additivity_check(tree, triples, solve)) out.push_back(std::move(r));
    });
}

/// Every module invariant on the given space, plus the seeded random families.
inline SuiteReport run_property_suite(const ResistanceNetwork& net, const MeasureVector& mu,
                                      const std::optional<MetricTree>& tree, const SuiteOptions& opt = {})
{
    SuiteReport report;
    std::mt19937_64 rng(opt.seed);
    network_properties(net, rng, report.checks);
    inequality_properties(net, rng, report.checks);
    dirac_properties(net, mu, rng, report.checks);
    connes_properties(net, mu, opt, report.checks);
    metric_properties(net, mu, opt, report.checks);
    chain_properties(rng, opt, report.checks);
    if (tree) tree_properties(*tree, opt, report.checks);
    return report;
}

}  // namespace dirform

#endif
