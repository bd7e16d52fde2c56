#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "dirform/io.hpp"

#include "fixtures.hpp"

using namespace dirform;

namespace {

const std::string kCli = DIRFORM_CLI;
const std::string kSamples = DIRFORM_SAMPLES;

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args)
{
    Run r;
    const std::string cmd = kCli + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string scratch(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / ("dirform_io_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

}  // namespace

TEST(Io, RoundTripsNetworks)
{
    const auto file = load_network_file(kSamples + "/triangle.json");
    EXPECT_EQ(file.network.num_vertices(), 3u);
    ASSERT_TRUE(file.mu && file.m);
    EXPECT_DOUBLE_EQ(file.m->total(), 0.9);
    const Json j = network_to_json(file.network);
    const auto again = network_from_json(j, "roundtrip");
    EXPECT_EQ(again.network.vertex_ids(), file.network.vertex_ids());
    for (std::size_t e = 0; e < 3; ++e) EXPECT_EQ(again.network.edge(e).conductance, file.network.edge(e).conductance);
    const auto m = load_measure_file(file.network, kSamples + "/triangle_measure.json");
    EXPECT_DOUBLE_EQ(m[2], 2.0);
}

TEST(Io, MalformedJsonReportsPosition)
{
    try {
        load_network_file(kSamples + "/malformed.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::parse);
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
    }
}

TEST(Io, SchemaErrors)
{
    auto code = [](const std::string& text) {
        try {
            network_from_json(parse_json_text(text, "inline"), "inline");
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::internal;
    };
    EXPECT_EQ(code(R"({"edges": []})"), ErrorCode::parse);
    EXPECT_EQ(code(R"({"vertices": ["a"], "edges": [], "extra": 1})"), ErrorCode::parse);
    EXPECT_EQ(code(R"({"vertices": ["a","b"], "edges": [{"u":"a","v":"b","c":"x"}]})"), ErrorCode::parse);
    EXPECT_EQ(code(R"({"vertices": ["a","b"], "edges": [{"u":"a","v":"q","c":1}]})"), ErrorCode::unknown_vertex);
    EXPECT_EQ(code(R"({"vertices": ["a","b"], "edges": [{"u":"a","v":"b","c":1}], "mu": {"a": 1}})"), ErrorCode::parse);
    EXPECT_EQ(code(R"({"vertices": ["a","b"], "edges": [{"u":"a","v":"b","c":1}], "mu": {"a": 1, "b": 0}})"),
              ErrorCode::invalid_argument);
    EXPECT_EQ(code(R"({"vertices": ["a","b","c"], "edges": [{"u":"a","v":"b","c":1}]})"), ErrorCode::disconnected);
}

TEST(Io, AtomicWriteReplacesTarget)
{
    const auto path = scratch("atomic.txt");
    atomic_write(path, "first");
    atomic_write(path, "second");
    std::ifstream in(path);
    std::stringstream s;
    s << in.rdbuf();
    EXPECT_EQ(s.str(), "second");
    for (const auto& entry : std::filesystem::directory_iterator(std::filesystem::path(path).parent_path()))
        EXPECT_EQ(entry.path().filename().string().find(".tmp."), std::string::npos);
    EXPECT_ANY_THROW(atomic_write("/nonexistent-dir/x.txt", "x"));
}

TEST(Io, NumbersRoundTrip)
{
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678901234567}) EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Cli, VerifyStarExitsZero)
{
    const auto r = run("verify --space star --N 4 --k 16 --seed 7");
    EXPECT_EQ(r.status, 0);
    const Json doc = Json::parse(r.out);
    EXPECT_TRUE(doc["pass"].get<bool>());
    EXPECT_EQ(doc["seed"].get<int>(), 7);
    EXPECT_GT(doc["checks"].size(), 10u);
}

TEST(Cli, MalformedJsonExitsTwo)
{
    EXPECT_EQ(run("metrics --input " + kSamples + "/malformed.json").status, 2);
    EXPECT_EQ(run("metrics --input " + kSamples + "/disconnected.json").status, 2);
    EXPECT_EQ(run("metrics --input /nonexistent.json").status, 2);
    EXPECT_EQ(run("metrics --no-such-flag").status, 2);
    EXPECT_EQ(run("metrics --space path --tol bogus=1").status, 2);
    EXPECT_EQ(run("").status, 2);
}

TEST(Cli, OutputIsDeterministic)
{
    const auto a = scratch("a.csv"), b = scratch("b.csv");
    const std::string args = "metrics --space star --N 3 --k 4 --kind intrinsic --seed 3 --out ";
    ASSERT_EQ(run(args + a).status, 0);
    ASSERT_EQ(run(args + b).status, 0);
    std::ifstream fa(a), fb(b);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(sa.str().rfind("# kind=intrinsic seed=3", 0), 0u);
    EXPECT_NE(sa.str().find("x,y,value,solver_iterations,certified_gap"), std::string::npos);

    const auto r1 = run("report --space gasket --level 2 --seed 5");
    const auto r2 = run("report --space gasket --level 2 --seed 5");
    EXPECT_EQ(r1.status, 0);
    EXPECT_EQ(r1.out, r2.out);
}

TEST(Cli, MetricsFromFile)
{
    const auto r = run("metrics --input " + kSamples + "/triangle.json --kind resistance --pairs a,b");
    ASSERT_EQ(r.status, 0);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    std::getline(lines, line);
    // direct edge a-b in parallel with the series pair a-c-b
    const double expected = 1.0 / (1.0 + 1.0 / (0.5 + 1.0 / 3.0));
    EXPECT_NEAR(std::stod(line.substr(line.find(',', 2) + 1)), expected, 1e-12);

    const auto in = run("metrics --input " + kSamples + "/triangle.json --kind intrinsic");
    EXPECT_EQ(in.status, 0);
    const auto co = run("metrics --input " + kSamples + "/two_vertex.json --kind connes");
    ASSERT_EQ(co.status, 0);
    EXPECT_NE(co.out.find("x,y,1.414"), std::string::npos);
}

TEST(Cli, BuildDiracConnesReport)
{
    const auto build = run("build --space gasket --level 1");
    ASSERT_EQ(build.status, 0);
    const Json net = Json::parse(build.out);
    EXPECT_EQ(net["vertices"].size(), 6u);
    EXPECT_EQ(net["geometry"]["level"].get<int>(), 1);
    const auto rebuilt = network_from_json(net, "cli");
    EXPECT_EQ(rebuilt.network.num_edges(), 9u);

    const auto dirac = run("dirac --input " + kSamples + "/two_vertex.json --check all");
    ASSERT_EQ(dirac.status, 0);
    const Json spec = Json::parse(dirac.out);
    ASSERT_EQ(spec["eigenvalues"].size(), 3u);
    EXPECT_NEAR(spec["eigenvalues"][0]["value"].get<double>(), -std::sqrt(2.0), 1e-12);
    EXPECT_TRUE(spec["spectral_representation"]["pass"].get<bool>());
    EXPECT_TRUE(spec["square_blocks"]["pass"].get<bool>());

    const auto connes = run("connes --space path --refine 4,16 --seed 2");
    ASSERT_EQ(connes.status, 0);
    EXPECT_EQ(Json::parse(connes.out)["levels"].size(), 2u);

    const auto report = run("report --space gasket --level 3 --mu kusuoka");
    ASSERT_EQ(report.status, 0);
    const Json rep = Json::parse(report.out);
    EXPECT_TRUE(rep.contains("resistance"));
    EXPECT_TRUE(rep.contains("dirac_spectrum"));
    EXPECT_EQ(rep["kernel"]["dim_ker_D"].get<int>(), 1 + static_cast<int>(rep["network"]["edges"].get<int>()) -
                                                         rep["network"]["vertices"].get<int>() + 1);
    EXPECT_TRUE(rep["bracket"]["pass"].get<bool>());
}
