#include <random>

#include <gtest/gtest.h>

#include "dirform/energy.hpp"
#include "dirform/inequalities.hpp"
#include "dirform/random.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dirform;
using fixture::make;
using fixture::vec;

namespace {

ErrorCode code_of(auto&& body)
{
    try {
        body();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::internal;
}

}  // namespace

TEST(Build, TwoVertexNetwork)
{
    const auto net = fixture::two_vertex();
    EXPECT_EQ(net.num_vertices(), 2u);
    EXPECT_EQ(net.num_edges(), 1u);
    EXPECT_EQ(net.cycle_rank(), 0u);
}

TEST(Build, TriangleWithDistinctConductances)
{
    const auto net = fixture::triangle(1.0, 2.0, 3.0);
    EXPECT_EQ(net.num_edges(), 3u);
    EXPECT_EQ(net.cycle_rank(), 1u);
    EXPECT_DOUBLE_EQ(net.conductances().sum(), 6.0);
}

TEST(Build, RejectsMalformedGraphs)
{
    EXPECT_EQ(code_of([] { make({"x", "y"}, {}); }), ErrorCode::disconnected);
    EXPECT_EQ(code_of([] { make({"x", "y"}, {{"x", "y", 1.0}, {"y", "x", 2.0}}); }), ErrorCode::duplicate_edge);
    EXPECT_EQ(code_of([] { make({"x", "y"}, {{"x", "y", 0.0}}); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { make({"x", "y"}, {{"x", "y", -1.0}}); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { make({"x", "y"}, {{"x", "x", 1.0}}); }), ErrorCode::invalid_argument);
    EXPECT_EQ(code_of([] { make({"x", "y"}, {{"x", "z", 1.0}}); }), ErrorCode::unknown_vertex);
    EXPECT_EQ(code_of([] { make({"x", "x"}, {{"x", "x", 1.0}}); }), ErrorCode::invalid_argument);
}

TEST(Build, DisconnectedErrorNamesComponents)
{
    try {
        make({"a", "b", "c", "d"}, {{"a", "b", 1.0}, {"c", "d", 1.0}});
        FAIL();
    } catch (const Error& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("a"), std::string::npos);
        EXPECT_NE(msg.find("c"), std::string::npos);
    }
}

TEST(Build, OrientationIsLexicographic)
{
    const auto net = make({"b", "a"}, {{"b", "a", 1.0}});
    EXPECT_EQ(net.id(net.edge(0).tail), "a");
    EXPECT_EQ(net.id(net.edge(0).head), "b");
}

TEST(Energy, ClosedForms)
{
    EXPECT_DOUBLE_EQ(energy(fixture::two_vertex(), vec({0, 1})), 1.0);
    EXPECT_DOUBLE_EQ(energy(fixture::unit_path(2), vec({0, 1, 3})), 5.0);
    EXPECT_NEAR(energy(fixture::triangle(1, 2, 3), vec({4, 4, 4})), 0.0, 1e-15);
}

TEST(Energy, IndexMismatchIsReported)
{
    EXPECT_EQ(code_of([] { energy(fixture::two_vertex(), vec({0, 1, 2})); }), ErrorCode::index_mismatch);
}

TEST(Energy, MatchesEdgeSumOracle)
{
    std::mt19937_64 rng(11);
    for (int s = 0; s < 20; ++s) {
        const auto net = random_network(rng);
        const auto f = random_function(rng, net.num_vertices());
        const auto g = random_function(rng, net.num_vertices());
        EXPECT_NEAR(energy(net, f, g), oracle::edge_energy(net, f, g), 1e-12 * (1.0 + std::abs(energy(net, f, g))));
    }
}

TEST(Generator, TwoVertexSpectrum)
{
    const auto net = fixture::two_vertex();
    const auto basis = Generator(net, MeasureVector::uniform(2)).eigenbasis();
    EXPECT_NEAR(basis.values[0], 0.0, 1e-14);
    EXPECT_NEAR(basis.values[1], 2.0, 1e-14);
}

TEST(Generator, SelfAdjointAndFactorizesEnergy)
{
    std::mt19937_64 rng(3);
    for (int s = 0; s < 20; ++s) {
        const auto net = random_network(rng);
        const auto mu = random_measure(rng, net.num_vertices());
        const Generator gen(net, mu);
        const auto f = random_function(rng, net.num_vertices());
        const auto g = random_function(rng, net.num_vertices());
        EXPECT_NEAR(inner_mu(mu, f, gen.apply(g)), inner_mu(mu, gen.apply(f), g), 1e-11);
        EXPECT_NEAR(energy(net, f, g), -inner_mu(mu, f, gen.apply(g)), 1e-11);
        EXPECT_LT(gen.apply(FunctionVector::Constant(f.size(), 2.5)).cwiseAbs().maxCoeff(), 1e-13);
        if (net.num_vertices() >= 2) {
            EXPECT_GT(gen.eigenbasis().values.maxCoeff(), 0.0);
        }
        EXPECT_LT((gen.matrix() * f - gen.apply(f)).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(Generator, RejectsZeroWeight)
{
    EXPECT_ANY_THROW(Generator(fixture::two_vertex(), MeasureVector(vec({1.0, 0.0}))));
}

TEST(EnergyMeasure, TwoVertexByHand)
{
    const auto g = energy_measure(fixture::two_vertex(), vec({0, 1}));
    EXPECT_DOUBLE_EQ(g[0], 0.5);
    EXPECT_DOUBLE_EQ(g[1], 0.5);
    EXPECT_DOUBLE_EQ(g.sum(), 1.0);
}

TEST(EnergyMeasure, ConstantsCarryNoEnergy)
{
    const auto g = energy_measure(fixture::triangle(1, 2, 3), vec({7, 7, 7}));
    EXPECT_LT(g.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(EnergyMeasure, AgreesWithTestFunctionOracleAndPolarizes)
{
    std::mt19937_64 rng(5);
    for (int s = 0; s < 50; ++s) {
        const auto net = random_network(rng);
        const auto f = random_function(rng, net.num_vertices());
        const auto g = random_function(rng, net.num_vertices());
        const auto gf = energy_measure(net, f);
        EXPECT_LT((gf - oracle::energy_measure_by_test_functions(net, f)).cwiseAbs().maxCoeff(), 1e-12 * (1 + gf.sum()));
        EXPECT_NEAR(gf.sum(), energy(net, f), 1e-12 * (1 + energy(net, f)));
        EXPECT_GE(gf.minCoeff(), 0.0);
        const auto lhs = energy_measure(net, f + g);
        const Eigen::VectorXd rhs = gf + 2.0 * energy_measure(net, f, g) + energy_measure(net, g);
        EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-11 * (1 + lhs.sum()));
    }
}

TEST(Resistance, ClosedForms)
{
    for (std::size_t k : {1u, 3u, 8u}) {
        const auto net = fixture::unit_path(k);
        EXPECT_NEAR(effective_resistance(net, 0, k), static_cast<double>(k), 1e-12);
    }
    EXPECT_DOUBLE_EQ(effective_resistance(fixture::two_vertex(), "x", "x"), 0.0);
    EXPECT_NEAR(effective_resistance(fixture::two_vertex(2.0), "x", "y"), 0.5, 1e-14);
    EXPECT_NEAR(effective_resistance(fixture::triangle(), "a", "b"), 2.0 / 3.0, 1e-14);
    EXPECT_EQ(code_of([] { effective_resistance(fixture::two_vertex(), "x", "q"); }), ErrorCode::unknown_vertex);
}

TEST(Resistance, MatchesPseudoinverseAndIsAMetric)
{
    std::mt19937_64 rng(17);
    for (int s = 0; s < 30; ++s) {
        const auto net = random_network(rng, {2, 12, 0.3, 0.2, 5.0});
        const Eigen::MatrixXd r = resistance_matrix(net);
        const Eigen::MatrixXd o = oracle::resistance_pinv(net);
        EXPECT_LT((r - o).cwiseAbs().maxCoeff(), 1e-10);
        const auto n = r.rows();
        for (Eigen::Index x = 0; x < n; ++x)
            for (Eigen::Index y = 0; y < n; ++y) {
                EXPECT_NEAR(r(x, y), r(y, x), 1e-12);
                for (Eigen::Index z = 0; z < n; ++z) EXPECT_LE(r(x, y), r(x, z) + r(z, y) + 1e-10);
            }
        const auto u = random_function(rng, net.num_vertices());
        for (Eigen::Index x = 0; x < n; ++x)
            for (Eigen::Index y = 0; y < n; ++y) EXPECT_LE(std::pow(u[x] - u[y], 2), r(x, y) * energy(net, u) + 1e-10);
    }
}

TEST(Trace, SeriesAndStarDelta)
{
    const std::vector<std::string> ends{"v0", "v2"};
    const auto series = trace_to_subset(fixture::unit_path(2), ends);
    ASSERT_EQ(series.num_edges(), 1u);
    EXPECT_NEAR(series.edge(0).conductance, 0.5, 1e-14);

    const auto star = make({"o", "l1", "l2", "l3"}, {{"o", "l1", 1.0}, {"o", "l2", 1.0}, {"o", "l3", 1.0}});
    const std::vector<std::string> leaves{"l1", "l2", "l3"};
    const auto delta = trace_to_subset(star, leaves);
    EXPECT_EQ(delta.num_edges(), 3u);
    for (const auto& e : delta.edges()) EXPECT_NEAR(e.conductance, 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(effective_resistance(delta, "l1", "l3"), 2.0, 1e-12);

    const auto tri = fixture::triangle(1, 2, 3);
    const auto same = trace_to_subset(tri, tri.vertex_ids());
    EXPECT_LT((resistance_matrix(same) - resistance_matrix(tri)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_ANY_THROW(trace_to_subset(tri, {}));
}

TEST(Trace, PreservesResistanceAgainstUnreducedSolve)
{
    std::mt19937_64 rng(23);
    for (int s = 0; s < 30; ++s) {
        const auto net = random_network(rng, {3, 10, 0.3, 0.2, 5.0});
        std::vector<std::string> b;
        for (std::size_t v = 0; v < net.num_vertices(); v += 2) b.push_back(net.id(v));
        if (b.size() < 2) b.push_back(net.id(1));
        const auto reduced = trace_to_subset(net, b);
        const Eigen::MatrixXd full = oracle::resistance_pinv(net);
        for (std::size_t i = 0; i < reduced.num_vertices(); ++i)
            for (std::size_t j = 0; j < reduced.num_vertices(); ++j)
                EXPECT_NEAR(effective_resistance(reduced, i, j),
                            full(static_cast<Eigen::Index>(net.index_of(reduced.id(i))),
                                 static_cast<Eigen::Index>(net.index_of(reduced.id(j)))),
                            1e-10);
    }
}

TEST(Contraction, IdentityIsAnEqualityCase)
{
    std::mt19937_64 rng(2);
    const auto net = random_network(rng, {5, 5, 0.4, 0.2, 5.0});
    const std::vector<FunctionVector> fs{random_function(rng, 5)};
    const auto r = check_contraction_inequality(net, NormalContraction::identity(), fs, FunctionVector::Ones(5));
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.lhs, r.rhs, 1e-14 * (1 + r.rhs));
}

TEST(Contraction, TruncationOnFiveVertices)
{
    std::mt19937_64 rng(4);
    const auto net = random_network(rng, {5, 5, 0.4, 0.2, 5.0});
    const std::vector<FunctionVector> fs{random_function(rng, 5, 2.0)};
    const auto r = check_contraction_inequality(net, NormalContraction::unit_truncation(), fs, FunctionVector::Ones(5));
    EXPECT_TRUE(r.pass);
    EXPECT_LE(r.lhs, r.rhs + 1e-12);
    // With h = 1 the radicand is E(f,f) − ½E(f²,1) = E(f).
    const FunctionVector g = NormalContraction::unit_truncation().apply(fs);
    EXPECT_NEAR(r.lhs, std::sqrt(oracle::edge_energy(net, g, g)), 1e-12);
    EXPECT_NEAR(r.rhs, std::sqrt(oracle::edge_energy(net, fs[0], fs[0])), 1e-12);
}

TEST(Contraction, ZeroWeightAndBadInputs)
{
    std::mt19937_64 rng(6);
    const auto net = random_network(rng, {4, 6, 0.4, 0.2, 5.0});
    const std::size_t n = net.num_vertices();
    const std::vector<FunctionVector> fs{random_function(rng, n), random_function(rng, n)};
    const auto r = check_contraction_inequality(net, NormalContraction::minimum(2), fs, FunctionVector::Zero(n));
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_EQ(r.rhs, 0.0);
    EXPECT_ANY_THROW(check_contraction_inequality(net, NormalContraction::minimum(2), fs, -FunctionVector::Ones(n)));
    const NormalContraction doubling("double", 1, [](std::span<const double> x) { return 2.0 * x[0]; });
    EXPECT_FALSE(doubling.verify());
    EXPECT_ANY_THROW(check_contraction_inequality(net, doubling, std::span(fs).first(1), FunctionVector::Ones(n)));
}

TEST(Contraction, CatalogOnRandomInstances)
{
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    for (int s = 0; s < 100; ++s) {
        const auto net = random_network(rng);
        const std::size_t n = net.num_vertices();
        FunctionVector h(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = unit(rng);
        for (const auto& c : contraction_catalog(3)) {
            EXPECT_TRUE(c.verify()) << c.name();
            std::vector<FunctionVector> fs;
            for (std::size_t i = 0; i < c.arity(); ++i) fs.push_back(random_function(rng, n));
            const auto r = check_contraction_inequality(net, c, fs, h);
            EXPECT_TRUE(r.pass) << c.name() << " lhs=" << r.lhs << " rhs=" << r.rhs;
        }
    }
}

TEST(Product, ClosedFormsAndRandomInstances)
{
    const auto net = fixture::two_vertex();
    const auto same = check_product_inequality(net, vec({0, 1}), vec({0, 1}));
    EXPECT_TRUE(all_pass(same));
    EXPECT_NEAR(same.front().lhs * same.front().lhs, 1.0, 1e-14);  // Γ(f²)(X) = E(f²) = 1
    EXPECT_NEAR(same.front().rhs, 2.0 * std::sqrt(1.0), 1e-14);

    std::mt19937_64 rng(31);
    for (int s = 0; s < 100; ++s) {
        const auto r = random_network(rng);
        const std::size_t n = r.num_vertices();
        const auto f = random_function(rng, n);
        EXPECT_TRUE(all_pass(check_product_inequality(r, f, random_function(rng, n))));
        const auto constant = check_product_inequality(r, f, FunctionVector::Ones(static_cast<Eigen::Index>(n)));
        EXPECT_TRUE(all_pass(constant));
        EXPECT_LE(constant.front().lhs, constant.front().rhs + 1e-12);
        const auto zero = check_product_inequality(r, FunctionVector::Zero(static_cast<Eigen::Index>(n)), f);
        EXPECT_EQ(zero.front().lhs, 0.0);
    }
}

TEST(ApproxGamma, SubsetBound)
{
    std::mt19937_64 rng(37);
    std::bernoulli_distribution coin(0.5);
    for (int s = 0; s < 40; ++s) {
        const auto net = random_network(rng);
        const std::size_t n = net.num_vertices();
        const auto f = random_function(rng, n), g = random_function(rng, n);
        const auto gf = energy_measure(net, f), gg = energy_measure(net, g);
        for (int t = 0; t < 10; ++t) {
            double af = 0, ag = 0;
            for (std::size_t v = 0; v < n; ++v)
                if (coin(rng)) {
                    af += gf[static_cast<Eigen::Index>(v)];
                    ag += gg[static_cast<Eigen::Index>(v)];
                }
            EXPECT_LE(std::abs(std::sqrt(af) - std::sqrt(ag)), std::sqrt(oracle::edge_energy(net, f - g, f - g)) + 1e-10);
        }
    }
}
