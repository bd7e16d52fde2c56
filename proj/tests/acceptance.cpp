// Acceptance run: one [PASS]/[FAIL] line per criterion, nonzero exit on any failure.

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "dirform/connes.hpp"
#include "dirform/inequalities.hpp"
#include "dirform/metrics.hpp"
#include "dirform/random.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dirform;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok && pass) detail << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

using Criterion = std::function<void(Outcome&)>;

std::size_t q_index(const MetricTree& t, std::size_t n) { return t.network().index_of("q" + std::to_string(n)); }

void star_resistance(Outcome& out)
{
    double worst = 0.0;
    for (std::size_t n : {2u, 5u, 10u})
        for (std::size_t k : {1u, 4u, 16u}) {
            const std::vector<double> a(n, 1.0);
            const auto t = build_star(n, k, a);
            const auto r = resistance_metric(t.network());
            const auto p = t.network().index_of("p");
            for (std::size_t i = 1; i <= n; ++i) {
                worst = std::max(worst, std::abs(r(p, q_index(t, i)) - 1.0));
                for (std::size_t j = i + 1; j <= n; ++j) worst = std::max(worst, std::abs(r(q_index(t, i), q_index(t, j)) - 2.0));
            }
        }
    out.require(worst < 1e-10, "resistance error");
    out.detail << "max error " << worst;
}

void star_intrinsic(Outcome& out)
{
    const std::vector<double> a{0.25, 1.0, 4.0, 0.5};
    const auto t = build_star(a.size(), 64, a);
    const auto& net = t.network();
    const auto mu = t.lumped_measure();
    const auto p = net.index_of("p");
    double closed = 0.0, solver = 0.0;
    std::vector<Triple> triples;
    for (std::size_t n = 1; n <= a.size(); ++n) {
        const auto q = q_index(t, n);
        closed = std::max(closed, std::abs(intrinsic_metric_tree(t, p, q) - std::sqrt(a[n - 1])));
        solver = std::max(solver, std::abs(intrinsic_metric(net, mu, p, q).distance - std::sqrt(a[n - 1])));
        for (std::size_t m = n + 1; m <= a.size(); ++m) triples.push_back({q, p, q_index(t, m)});
    }
    const auto additivity = dendrite_additivity_check(t, triples);
    out.require(closed < 1e-12, "closed form");
    out.require(solver < 1e-3, "solver at k=64");
    out.require(all_pass(additivity), "additivity");
    double add = 0.0;
    for (const auto& r : additivity) add = std::max(add, std::abs(r.lhs - r.rhs));
    out.detail << "closed-form error " << closed << ", solver error " << solver << ", additivity error " << add;
}

void metric_chain(Outcome& out)
{
    std::mt19937_64 rng(301);
    double worst = -1.0;
    for (int s = 0; s < 100; ++s) {
        const auto net = random_network(rng);
        const auto coords = build_coordinate_sequence(net);
        const std::vector<double> a(coords.functions.size(), 1.0 / static_cast<double>(coords.functions.size()));
        const auto chain = compare_metric_chain(net, build_m0(net, coords, a), dominated_coordinates(coords, a), 1e-6);
        for (const auto& r : chain.checks) worst = std::max(worst, r.lhs - r.rhs);
        out.require(chain.pass, "instance " + std::to_string(s));
    }
    out.detail << "100 networks, max (lhs - rhs) " << worst;
}

void energy_measure_routes(Outcome& out)
{
    std::mt19937_64 rng(302);
    double routes = 0.0, mass = 0.0;
    for (int s = 0; s < 100; ++s) {
        const auto net = random_network(rng);
        const auto f = random_function(rng, net.num_vertices());
        const Eigen::VectorXd by_edge = energy_measure_edge(net, f, f);
        const Eigen::VectorXd by_form = energy_measure_from_form(net, f, f);
        const double e = energy(net, f);
        routes = std::max(routes, (by_edge - by_form).cwiseAbs().maxCoeff() / (1.0 + e));
        mass = std::max(mass, std::abs(by_edge.sum() - e) / (1.0 + e));
    }
    out.require(routes < 1e-12, "edge and form routes");
    out.require(mass < 1e-12, "total mass");
    out.detail << "route difference " << routes << ", mass error " << mass;
}

void spectral_representation(Outcome& out)
{
    std::mt19937_64 rng(303);
    double eig = 0.0, res = 0.0;
    for (int s = 0; s < 100; ++s) {
        const auto g = random_network(rng, {2, 20, 0.2, 0.2, 5.0});
        const DiracOperator d(g, random_measure(rng, g.num_vertices()));
        const auto r = check_spectral_representation(d);
        eig = std::max(eig, r.eigenvalue_error);
        res = std::max(res, r.max_residual);
        out.require(r.pass, "instance " + std::to_string(s));
    }
    const auto two = dirac_spectrum(DiracOperator(fixture::two_vertex(), MeasureVector::uniform(2))).values;
    const double two_err = std::max({std::abs(two[0] + std::sqrt(2.0)), std::abs(two[1]), std::abs(two[2] - std::sqrt(2.0))});
    out.require(two.size() == 3 && two_err < 1e-12, "two-vertex spectrum");
    out.detail << "eigenvalue error " << eig << ", residual " << res << ", two-vertex error " << two_err;
}

void square_blocks(Outcome& out)
{
    std::mt19937_64 rng(304);
    double square = 0.0, spectrum = 0.0;
    for (int s = 0; s < 100; ++s) {
        const auto g = random_network(rng, {2, 20, 0.2, 0.2, 5.0});
        const auto b = check_square_blocks(DiracOperator(g, random_measure(rng, g.num_vertices())));
        square = std::max(square, b.square_error);
        spectrum = std::max(spectrum, b.spectrum_error);
        out.require(b.pass && b.square_error < 1e-12 && b.nonzero_vertex == b.nonzero_edge, "instance " + std::to_string(s));
    }
    out.detail << "block error " << square << ", nonzero spectrum error " << spectrum;
}

void spectral_triple(Outcome& out)
{
    std::mt19937_64 rng(305);
    double ratio = 0.0;
    for (int s = 0; s < 20; ++s) {
        const auto g = random_network(rng, {2, 20, 0.2, 0.2, 5.0});
        const auto r = verify_spectral_triple(g, random_measure(rng, g.num_vertices()), 50, 100 + static_cast<std::uint64_t>(s));
        ratio = std::max(ratio, r.max_norm_ratio);
        out.require(r.pass && r.samples.size() == 50, "random instance " + std::to_string(s));
    }
    for (int n = 0; n <= 5; ++n) {
        const auto g = build_gasket(n);
        const auto r = verify_spectral_triple(g.network, kusuoka_measure(g), 50, 7);
        ratio = std::max(ratio, r.max_norm_ratio);
        out.require(r.pass, "gasket level " + std::to_string(n));
    }
    out.detail << "20 random networks and gasket levels 0..5, max norm ratio " << ratio;
}

void bracket_and_coincidence(Outcome& out)
{
    std::mt19937_64 rng(306);
    double lo = 1.0, hi = 0.0;
    for (int s = 0; s < 20; ++s) {
        const auto g = random_network(rng, {2, 12, 0.3, 0.2, 5.0});
        const DiracOperator d(g, random_measure(rng, g.num_vertices()));
        for (int j = 0; j < 50; ++j) {
            const auto r = commutator_norm(d, random_function(rng, g.num_vertices()));
            if (r.gamma_sup > 0.0) {
                const double q = r.commutator_norm * r.commutator_norm / r.gamma_sup;
                lo = std::min(lo, q);
                hi = std::max(hi, q);
            }
            out.require(r.pass, "bracket");
        }
    }
    const std::vector<std::size_t> schedule{4, 16, 64};
    const auto c = metric_coincidence_check([](std::size_t k) { return build_path(k, 1.0); },
                                            [](const MetricTree& t) { return std::pair{t.terminals()[0], t.terminals()[1]}; },
                                            schedule);
    out.require(c.levels.size() == 3 && c.levels.back().relative_gap < 0.05, "relative gap at k=64");
    out.require(c.monotone, "monotone gaps");
    out.detail << "norm^2/gamma_sup in [" << lo << ", " << hi << "], relative gap at k=64 "
               << (c.levels.empty() ? -1.0 : c.levels.back().relative_gap);
}

void inequalities(Outcome& out)
{
    std::mt19937_64 rng(307);
    std::uniform_real_distribution<double> weight(0.0, 2.0);
    double identity = 0.0;
    const auto catalog = contraction_catalog(3);
    for (const auto& c : catalog) out.require(c.verify(), "contraction " + c.name());
    for (int s = 0; s < 100; ++s) {
        const auto net = random_network(rng);
        const std::size_t n = net.num_vertices();
        FunctionVector h(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = weight(rng);
        for (const auto& c : catalog) {
            std::vector<FunctionVector> fs;
            for (std::size_t i = 0; i < c.arity(); ++i) fs.push_back(random_function(rng, n));
            const auto r = check_contraction_inequality(net, c, fs, h);
            out.require(r.pass, c.name() + " on instance " + std::to_string(s));
            if (c.name() == NormalContraction::identity().name())
                identity = std::max(identity, std::abs(r.lhs - r.rhs) / (1.0 + r.rhs));
        }
        out.require(all_pass(check_product_inequality(net, random_function(rng, n), random_function(rng, n))),
                    "product on instance " + std::to_string(s));
    }
    out.require(identity < 1e-12, "identity equality");
    out.detail << catalog.size() << " contractions on 100 networks, identity gap " << identity;
}

void gasket(Outcome& out)
{
    double harmonic = 0.0, trace = 0.0, kusuoka = 0.0, ortho = 0.0;
    for (int n = 0; n <= 5; ++n) {
        const auto g = build_gasket(n);
        std::size_t p = 1;
        for (int i = 0; i <= n; ++i) p *= 3;
        out.require(g.network.num_vertices() == (p + 3) / 2 && gasket_vertex_count(n) == (p + 3) / 2,
                    "vertex count at level " + std::to_string(n));
        harmonic = std::max(harmonic, std::abs(energy(g.network, harmonic_extension(g, {1.0, 0.0, 0.0})) - 2.0));
        const auto [h1, h2] = energy_orthonormal_harmonics(g);
        ortho = std::max({ortho, std::abs(energy(g.network, h1, h2)), std::abs(energy(g.network, h1) - 1.0),
                          std::abs(energy(g.network, h2) - 1.0)});
        kusuoka = std::max(kusuoka, std::abs(kusuoka_measure(g).total() - 2.0));
        if (n > 0) {
            const auto coarse = build_gasket(n - 1);
            const auto reduced = trace_to_subset(g.network, coarse.network.vertex_ids());
            const Eigen::MatrixXd rr = resistance_matrix(reduced), rc = resistance_matrix(coarse.network);
            for (std::size_t i = 0; i < coarse.network.num_vertices(); ++i)
                for (std::size_t j = 0; j < coarse.network.num_vertices(); ++j) {
                    const auto a = static_cast<Eigen::Index>(reduced.index_of(coarse.network.id(i)));
                    const auto b = static_cast<Eigen::Index>(reduced.index_of(coarse.network.id(j)));
                    trace = std::max(trace, std::abs(rr(a, b) - rc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
                }
        }
    }
    out.require(harmonic < 1e-10, "harmonic energy invariance");
    out.require(trace < 1e-10, "trace");
    out.require(kusuoka < 1e-12, "Kusuoka mass");
    out.require(ortho < 1e-12, "energy orthonormality");
    out.detail << "harmonic " << harmonic << ", trace " << trace << ", Kusuoka mass " << kusuoka << ", orthonormality "
               << ortho;
}

void oracle_agreement(Outcome& out)
{
    std::mt19937_64 rng(311);
    double intrinsic = 0.0, connes = 0.0;
    for (int s = 0; s < 10; ++s) {
        const auto net = random_network(rng, {2, 4, 0.5, 0.3, 3.0});
        const auto m = random_measure(rng, net.num_vertices(), 0.1, 0.5);
        for (std::size_t x = 0; x < net.num_vertices(); ++x)
            for (std::size_t y = x + 1; y < net.num_vertices(); ++y)
                intrinsic = std::max(intrinsic, std::abs(intrinsic_metric(net, m, x, y).distance -
                                                         oracle::intrinsic_brute_force(net, m.weights(), x, y)));
    }
    for (int s = 0; s < 10; ++s) {
        const auto net = random_network(rng, {2, 3, 0.5, 0.2, 5.0});
        const auto mu = random_measure(rng, net.num_vertices());
        const DiracOperator d(net, mu);
        for (std::size_t x = 0; x < net.num_vertices(); ++x)
            for (std::size_t y = x + 1; y < net.num_vertices(); ++y)
                connes = std::max(connes, std::abs(connes_distance(d, x, y).distance -
                                                   oracle::connes_ray_search(net, mu.weights(), x, y)));
    }
    out.require(intrinsic < 5e-3, "intrinsic against grid");
    out.require(connes < 5e-3, "Connes against ray search");
    out.detail << "intrinsic deviation " << intrinsic << ", Connes deviation " << connes;
}

}  // namespace

int main()
{
    const std::vector<std::pair<const char*, Criterion>> criteria{
        {"star resistance metric", star_resistance},
        {"star intrinsic metric", star_intrinsic},
        {"metric chain with indicator m0", metric_chain},
        {"energy measure routes", energy_measure_routes},
        {"Dirac spectral representation", spectral_representation},
        {"Dirac square blocks", square_blocks},
        {"spectral triple checklist", spectral_triple},
        {"commutator bracket and metric coincidence", bracket_and_coincidence},
        {"contraction and product inequalities", inequalities},
        {"gasket approximations", gasket},
        {"oracle agreement", oracle_agreement},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            criteria[i].second(out);
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << "exception: " << e.what();
        }
        std::printf("[%s] %zu %s: %s\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, out.detail.str().c_str());
        std::fflush(stdout);
        if (!out.pass) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
