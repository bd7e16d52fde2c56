// dirform: build spaces, compute metrics and spectra, run the property suite.
//
// Exit status: 0 success, 1 a verification check failed, 2 bad input or
// arguments, 3 solver failure, 4 internal consistency error.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dirform/connes.hpp"
#include "dirform/dirac.hpp"
#include "dirform/io.hpp"
#include "dirform/metrics.hpp"
#include "dirform/spaces.hpp"
#include "dirform/verify.hpp"

using namespace dirform;

namespace {

constexpr int kExitVerify = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;
constexpr int kExitInternal = 4;

struct Config {
    std::string command;
    std::string input;
    std::string out;
    std::string space;
    int level = 3;
    std::size_t N = 3;
    std::size_t k = 16;
    std::vector<double> a;
    double length = 1.0;
    std::string mu;
    std::string m;
    std::string pairs = "all";
    std::vector<std::size_t> refine;
    std::uint64_t seed = 1;
    std::vector<std::string> tol;
    std::string kind = "resistance";
    std::string base = "intrinsic";
    std::string check;
};

/// Tolerances adjustable through --tol name=value.
struct Tolerances {
    BarrierOptions intrinsic;
    BarrierOptions connes = connes_defaults();
    double chain = 1e-6;
    double coincidence = 0.05;
};

Tolerances parse_tolerances(const std::vector<std::string>& items)
{
    Tolerances t;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::parse, "--tol expects name=value, got '" + item + "'");
        const std::string name = item.substr(0, eq);
        double value = 0.0;
        try {
            std::size_t used = 0;
            value = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorCode::parse, "--tol " + name + ": not a number");
        }
        if (!(value > 0.0)) throw Error(ErrorCode::parse, "--tol " + name + ": must be positive");
        if (name == "intrinsic_gap")
            t.intrinsic.gap_tolerance = value;
        else if (name == "connes_gap")
            t.connes.gap_tolerance = value;
        else if (name == "chain")
            t.chain = value;
        else if (name == "coincidence")
            t.coincidence = value;
        else
            throw Error(ErrorCode::parse, "--tol: unknown tolerance '" + name +
                                              "' (known: intrinsic_gap, connes_gap, chain, coincidence)");
    }
    return t;
}

/// The space a command operates on.
struct Space {
    std::string type;  // path | star | gasket | file
    ResistanceNetwork network;
    std::optional<MetricTree> tree;
    std::optional<GasketApprox> gasket;
    std::optional<NetworkFile> file;
    Json geometry;
};

std::vector<double> star_densities(const Config& c)
{
    if (!c.a.empty()) {
        if (c.a.size() != c.N) throw Error(ErrorCode::invalid_argument, "--a needs one density per branch (--N)");
        return c.a;
    }
    return std::vector<double>(c.N, 1.0);
}

MetricTree build_tree(const Config& c, const std::string& type, std::size_t k)
{
    if (type == "path") return build_path(k, c.length);
    const auto a = star_densities(c);
    return build_star(c.N, k, a);
}

Space resolve_space(const Config& c)
{
    std::string type = c.space;
    if (type.empty()) type = c.input.empty() ? "path" : "file";
    if (type == "file") {
        if (c.input.empty()) throw Error(ErrorCode::invalid_argument, "--space file needs --input");
        NetworkFile f = load_network_file(c.input);
        Space s{type, f.network, std::nullopt, std::nullopt, std::nullopt, f.geometry ? *f.geometry : Json()};
        s.file = std::move(f);
        return s;
    }
    if (type == "path" || type == "star") {
        MetricTree tree = build_tree(c, type, c.k);
        Space s{type, tree.network(), std::nullopt, std::nullopt, std::nullopt, tree_geometry(tree, type)};
        s.tree = std::move(tree);
        return s;
    }
    if (type == "gasket") {
        GasketApprox g = build_gasket(c.level);
        Space s{type, g.network, std::nullopt, std::nullopt, std::nullopt, gasket_geometry(g)};
        s.gasket = std::move(g);
        return s;
    }
    throw Error(ErrorCode::invalid_argument, "--space must be path, star, gasket or file");
}

/// Reference measure: keyword, file path, or the space's natural default.
MeasureVector resolve_measure(const Space& s, const std::string& choice, bool energy_dominant)
{
    if (choice.empty()) {
        if (s.file) {
            if (energy_dominant && s.file->m) return *s.file->m;
            if (s.file->mu) return *s.file->mu;
        }
        if (s.tree) return s.tree->lumped_measure();
        if (s.gasket) return kusuoka_measure(*s.gasket);
        return MeasureVector::uniform(s.network.num_vertices());
    }
    if (choice == "uniform") return MeasureVector::uniform(s.network.num_vertices());
    if (choice == "lumped") {
        if (!s.tree) throw Error(ErrorCode::invalid_argument, "--mu lumped needs a path or star space");
        return s.tree->lumped_measure();
    }
    if (choice == "kusuoka") {
        if (!s.gasket) throw Error(ErrorCode::invalid_argument, "--mu kusuoka needs a gasket space");
        return kusuoka_measure(*s.gasket);
    }
    return load_measure_file(s.network, choice);
}

std::vector<std::pair<std::size_t, std::size_t>> resolve_pairs(const ResistanceNetwork& net, const std::string& spec)
{
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (spec == "all") {
        for (std::size_t x = 0; x < net.num_vertices(); ++x)
            for (std::size_t y = x + 1; y < net.num_vertices(); ++y) out.emplace_back(x, y);
        return out;
    }
    const auto comma = spec.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::parse, "--pairs expects 'all' or 'x,y'");
    out.emplace_back(net.index_of(spec.substr(0, comma)), net.index_of(spec.substr(comma + 1)));
    return out;
}

Json config_json(const Config& c)
{
    Json j;
    j["command"] = c.command;
    if (!c.input.empty()) j["input"] = c.input;
    j["space"] = c.space.empty() ? (c.input.empty() ? "path" : "file") : c.space;
    j["level"] = c.level;
    j["N"] = c.N;
    j["k"] = c.k;
    j["a"] = c.a;
    j["length"] = c.length;
    j["mu"] = c.mu;
    j["m"] = c.m;
    j["pairs"] = c.pairs;
    j["refine"] = c.refine;
    j["seed"] = c.seed;
    j["tol"] = c.tol;
    j["kind"] = c.kind;
    if (!c.check.empty()) j["check"] = c.check;
    return j;
}

void emit(const Config& c, const std::string& content)
{
    if (c.out.empty() || c.out == "-")
        std::cout << content;
    else
        atomic_write(c.out, content);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json commutator_json(const CommutatorReport& r)
{
    return {{"commutator_norm", r.commutator_norm},
            {"commutator_norm_squared", r.commutator_norm * r.commutator_norm},
            {"gamma_sup", r.gamma_sup},
            {"lower_bound", r.lower_bound},
            {"upper_ok", r.upper_ok},
            {"lower_ok", r.lower_ok},
            {"tolerance", 1e-12}};
}

Json spectrum_json(const Eigen::VectorXd& values, double gap)
{
    Json out = Json::array();
    for (const auto& [lo, hi] : clusters(values, gap)) {
        double mean = 0.0;
        for (Eigen::Index i = lo; i < hi; ++i) mean += values[i];
        mean /= static_cast<double>(hi - lo);
        out.push_back({{"value", mean}, {"multiplicity", hi - lo}});
    }
    return out;
}

// ---------------------------------------------------------------------------

int cmd_build(const Config& c)
{
    const Space s = resolve_space(c);
    Json doc = network_to_json(s.network);
    doc["mu"] = measure_to_json(s.network, resolve_measure(s, c.mu, false));
    if (!s.geometry.is_null()) doc["geometry"] = s.geometry;
    emit(c, dump(doc));
    return 0;
}

int cmd_metrics(const Config& c, const Tolerances& tol)
{
    const Space s = resolve_space(c);
    const auto& net = s.network;
    const auto pairs = resolve_pairs(net, c.pairs);
    std::ostringstream csv;
    double certified_tolerance = 0.0;
    struct Row {
        double value;
        int iterations;
        double gap;
    };
    std::vector<Row> rows;

    if (c.kind == "resistance" || c.kind == "sqrt_resistance" || c.kind == "coordinate") {
        MetricMatrix d = c.kind == "resistance"        ? resistance_metric(net)
                         : c.kind == "sqrt_resistance" ? sqrt_resistance_metric(net)
                                                       : coordinate_metric(net, build_coordinate_sequence(net));
        certified_tolerance = c.kind == "sqrt_resistance" ? 1e-9 : 1e-10;
        for (auto [x, y] : pairs) rows.push_back({d(x, y), 0, 0.0});
    } else if (c.kind == "intrinsic") {
        const MeasureVector m = resolve_measure(s, c.m.empty() ? c.mu : c.m, true);
        certified_tolerance = tol.intrinsic.gap_tolerance;
        for (auto [x, y] : pairs) {
            const auto sol = intrinsic_metric(net, m, x, y, tol.intrinsic);
            rows.push_back({sol.distance, sol.stats.iterations, sol.stats.certified_gap});
        }
    } else if (c.kind == "connes") {
        const DiracOperator d(net, resolve_measure(s, c.mu, false));
        certified_tolerance = tol.connes.gap_tolerance;
        for (auto [x, y] : pairs) {
            const auto sol = connes_distance(d, x, y, tol.connes);
            rows.push_back({sol.distance, sol.stats.iterations, sol.stats.certified_gap});
        }
    } else if (c.kind == "path_length") {
        MetricMatrix base{MetricKind::resistance, {}};
        if (c.base == "intrinsic")
            base = intrinsic_metric_matrix(net, resolve_measure(s, c.m.empty() ? c.mu : c.m, true), tol.intrinsic);
        else if (c.base == "resistance")
            base = resistance_metric(net);
        else if (c.base == "sqrt_resistance")
            base = sqrt_resistance_metric(net);
        else
            throw Error(ErrorCode::invalid_argument, "--base must be intrinsic, resistance or sqrt_resistance");
        certified_tolerance = c.base == "intrinsic" ? tol.intrinsic.gap_tolerance : 1e-10;
        const MetricMatrix d = path_length_metric(base, net);
        for (auto [x, y] : pairs) rows.push_back({d(x, y), 0, 0.0});
    } else {
        throw Error(ErrorCode::invalid_argument, "--kind must be resistance, sqrt_resistance, coordinate, intrinsic, "
                                                 "path_length or connes");
    }

    csv << "# kind=" << c.kind << " seed=" << c.seed << " tolerance=" << format_number(certified_tolerance) << "\n";
    csv << "x,y,value,solver_iterations,certified_gap\n";
    for (std::size_t i = 0; i < pairs.size(); ++i)
        csv << net.id(pairs[i].first) << "," << net.id(pairs[i].second) << "," << format_number(rows[i].value) << ","
            << rows[i].iterations << "," << format_number(rows[i].gap) << "\n";
    emit(c, csv.str());
    return 0;
}

int cmd_dirac(const Config& c)
{
    const Space s = resolve_space(c);
    const MeasureVector mu = resolve_measure(s, c.mu, false);
    const DiracOperator d(s.network, mu);
    const SpectralTolerances st;
    Json doc;
    doc["config"] = config_json(c);
    doc["seed"] = c.seed;
    doc["vertices"] = s.network.num_vertices();
    doc["edges"] = s.network.num_edges();
    doc["cycle_rank"] = s.network.cycle_rank();
    const Spectrum spectrum = dirac_spectrum(d);
    doc["eigenvalues"] = spectrum_json(spectrum.values, st.cluster_gap);
    doc["cluster_gap"] = st.cluster_gap;

    bool ok = true;
    if (c.check.empty() || c.check == "spectral" || c.check == "lemma43" || c.check == "all") {
        const auto r = check_spectral_representation(d, st);
        doc["spectral_representation"] = {{"pass", r.pass},
                                          {"eigenvalue_error", r.eigenvalue_error},
                                          {"eigenvalue_tolerance", st.eigenvalue},
                                          {"max_residual", r.max_residual},
                                          {"residual_tolerance", st.residual},
                                          {"orthonormality_error", r.orthonormality_error},
                                          {"max_subspace_sine", r.max_subspace_sine},
                                          {"subspace_tolerance", st.subspace},
                                          {"zero_multiplicity", r.zero_multiplicity},
                                          {"expected_zero_multiplicity", r.expected_zero_multiplicity}};
        ok = ok && r.pass;
    }
    if (c.check == "blocks" || c.check == "all") {
        const auto b = check_square_blocks(d);
        doc["square_blocks"] = {{"pass", b.pass},
                                {"square_error", b.square_error},
                                {"square_tolerance", 1e-12},
                                {"spectrum_error", b.spectrum_error},
                                {"spectrum_tolerance", 1e-9},
                                {"edge_zero_multiplicity", b.edge_zero_multiplicity}};
        ok = ok && b.pass;
    }
    if (!c.check.empty() && c.check != "spectral" && c.check != "lemma43" && c.check != "blocks" && c.check != "all")
        throw Error(ErrorCode::invalid_argument, "--check must be spectral, blocks or all");
    emit(c, dump(doc));
    return ok ? 0 : kExitVerify;
}

int cmd_connes(const Config& c, const Tolerances& tol)
{
    Space s = resolve_space(c);
    Json doc;
    doc["config"] = config_json(c);
    doc["seed"] = c.seed;
    doc["connes_gap_tolerance"] = tol.connes.gap_tolerance;
    doc["intrinsic_gap_tolerance"] = tol.intrinsic.gap_tolerance;

    if (!c.refine.empty()) {
        if (!s.tree) throw Error(ErrorCode::invalid_argument, "--refine needs a path or star space");
        const std::string type = s.type;
        auto factory = [&](std::size_t k) { return build_tree(c, type, k); };
        auto pair = [&](const MetricTree& t) -> std::pair<std::size_t, std::size_t> {
            if (c.pairs == "all") {
                const auto& term = t.terminals();
                return type == "path" ? std::make_pair(term[0], term[1]) : std::make_pair(term[1], term[2]);
            }
            const auto p = resolve_pairs(t.network(), c.pairs);
            return p.front();
        };
        const auto report = metric_coincidence_check(factory, pair, c.refine, tol.coincidence);
        Json levels = Json::array();
        for (const auto& l : report.levels)
            levels.push_back({{"k", l.k},
                              {"connes", l.connes},
                              {"intrinsic", l.intrinsic},
                              {"intrinsic_solver", l.intrinsic_solver},
                              {"gap", l.gap},
                              {"relative_gap", l.relative_gap},
                              {"certified_gap", l.certified_gap},
                              {"iterations", l.iterations}});
        doc["levels"] = std::move(levels);
        doc["monotone"] = report.monotone;
        doc["final_within"] = report.final_within;
        doc["final_tolerance"] = report.final_tolerance;
        doc["bracket"] = {{"lower", 0.5}, {"upper", 1.0}};
        emit(c, dump(doc));
        return report.pass ? 0 : kExitVerify;
    }

    const MeasureVector mu = resolve_measure(s, c.mu, false);
    const DiracOperator d(s.network, mu);
    Json rows = Json::array();
    bool ok = true;
    for (auto [x, y] : resolve_pairs(s.network, c.pairs)) {
        const auto con = connes_distance(d, x, y, tol.connes);
        const auto in = intrinsic_metric(s.network, mu, x, y, tol.intrinsic);
        const auto cr = commutator_norm(d, con.maximizer);
        const bool bracket = in.distance <= con.upper_bound + 1e-6 && con.distance <= std::sqrt(2.0) * in.upper_bound + 1e-6;
        ok = ok && bracket && cr.pass;
        rows.push_back({{"x", s.network.id(x)},
                        {"y", s.network.id(y)},
                        {"connes", con.distance},
                        {"connes_certified_gap", con.stats.certified_gap},
                        {"intrinsic", in.distance},
                        {"intrinsic_certified_gap", in.stats.certified_gap},
                        {"metric_bracket_ok", bracket},
                        {"maximizer_commutator", commutator_json(cr)}});
    }
    doc["pairs"] = std::move(rows);
    doc["bracket"] = {{"lower", 0.5}, {"upper", 1.0}};
    emit(c, dump(doc));
    return ok ? 0 : kExitVerify;
}

int cmd_verify(const Config& c)
{
    const Space s = resolve_space(c);
    const MeasureVector mu = resolve_measure(s, c.mu, false);
    SuiteOptions opt;
    opt.seed = c.seed;
    const SuiteReport report = run_property_suite(s.network, mu, s.tree, opt);
    Json doc;
    doc["config"] = config_json(c);
    doc["seed"] = c.seed;
    doc["pass"] = report.pass();
    doc["checks"] = reports_to_json(report.checks);
    emit(c, dump(doc));
    for (const auto& r : report.checks)
        if (!r.pass) std::cerr << "dirform: check failed: " << r.check << "\n";
    return report.pass() ? 0 : kExitVerify;
}

int cmd_report(const Config& c)
{
    const Space s = resolve_space(c);
    const MeasureVector mu = resolve_measure(s, c.mu, false);
    const auto& net = s.network;
    const DiracOperator d(net, mu);
    Json doc;
    doc["config"] = config_json(c);
    doc["seed"] = c.seed;
    doc["network"] = {{"vertices", net.num_vertices()}, {"edges", net.num_edges()}};
    if (!s.geometry.is_null()) doc["geometry"] = s.geometry;
    doc["mu"] = measure_to_json(net, mu);

    const MetricMatrix r = resistance_metric(net);
    Json table = Json::array();
    for (std::size_t x = 0; x < net.num_vertices(); ++x) {
        Json row = Json::array();
        for (std::size_t y = 0; y < net.num_vertices(); ++y) row.push_back(r(x, y));
        table.push_back(std::move(row));
    }
    doc["resistance"] = {{"vertices", net.vertex_ids()}, {"values", std::move(table)}, {"tolerance", 1e-10}};

    const Spectrum spectrum = dirac_spectrum(d);
    doc["dirac_spectrum"] = {{"eigenvalues", spectrum_json(spectrum.values, 1e-8)}, {"cluster_gap", 1e-8}};
    const auto rep = check_spectral_representation(d);
    doc["kernel"] = {{"dim_ker_D", rep.zero_multiplicity},
                     {"dim_ker_L", 1},
                     {"dim_ker_codifferential", net.cycle_rank()},
                     {"spectral_representation_pass", rep.pass}};

    const auto triple = verify_spectral_triple(net, mu, 50, c.seed);
    Json bracket = Json::array();
    double lo = 1e300, hi = 0.0;
    for (const auto& sample : triple.samples) {
        if (sample.gamma_sup <= 0.0) continue;
        const double ratio = sample.commutator_norm * sample.commutator_norm / sample.gamma_sup;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    doc["bracket"] = {{"samples", triple.samples.size()},
                      {"min_ratio", lo},
                      {"max_ratio", hi},
                      {"lower_constant", 0.5},
                      {"upper_constant", 1.0},
                      {"tolerance", 1e-12},
                      {"pass", triple.pass}};
    emit(c, dump(doc));
    return 0;
}

void add_common(CLI::App* sub, Config& c)
{
    sub->add_option("--input", c.input, "network JSON file");
    sub->add_option("--out", c.out, "output path (default: stdout)");
    sub->add_option("--space", c.space, "path | star | gasket | file")
        ->check(CLI::IsMember({"path", "star", "gasket", "file"}));
    sub->add_option("--level", c.level, "gasket level")->check(CLI::Range(0, 7));
    sub->add_option("--N", c.N, "star branches")->check(CLI::PositiveNumber);
    sub->add_option("--k", c.k, "segments per branch or path")->check(CLI::PositiveNumber);
    sub->add_option("--a", c.a, "star branch densities")->delimiter(',');
    sub->add_option("--length", c.length, "path length")->check(CLI::PositiveNumber);
    sub->add_option("--mu", c.mu, "uniform | lumped | kusuoka | measure file");
    sub->add_option("--m", c.m, "energy dominant measure: keyword or file");
    sub->add_option("--pairs", c.pairs, "all | x,y");
    sub->add_option("--refine", c.refine, "refinement schedule, e.g. 4,16,64")->delimiter(',');
    sub->add_option("--seed", c.seed, "seed for randomized checks");
    sub->add_option("--tol", c.tol, "tolerance override name=value");
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Energy forms, intrinsic metrics and Dirac operators on resistance networks"};
    app.require_subcommand(1);
    Config c;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> descriptions{
        {"build", "build a network and write it as JSON"},
        {"metrics", "metric tables as CSV"},
        {"dirac", "Dirac spectrum and structural checks"},
        {"connes", "spectral distances and refinement checks"},
        {"verify", "run the property suite"},
        {"report", "summary JSON for one network"},
    };
    for (const char* name : {"build", "metrics", "dirac", "connes", "verify", "report"}) {
        CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
        add_common(sub, c);
        subs[name] = sub;
    }
    subs["metrics"]
        ->add_option("--kind", c.kind, "metric kind")
        ->check(CLI::IsMember({"resistance", "sqrt_resistance", "coordinate", "intrinsic", "path_length", "connes"}));
    subs["metrics"]->add_option("--base", c.base, "base metric for path_length");
    subs["dirac"]->add_option("--check", c.check, "spectral | blocks | all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInput;
    }
    for (const auto& [name, sub] : subs)
        if (sub->parsed()) c.command = name;

    try {
        const Tolerances tol = parse_tolerances(c.tol);
        if (c.command == "build") return cmd_build(c);
        if (c.command == "metrics") return cmd_metrics(c, tol);
        if (c.command == "dirac") return cmd_dirac(c);
        if (c.command == "connes") return cmd_connes(c, tol);
        if (c.command == "verify") return cmd_verify(c);
        if (c.command == "report") return cmd_report(c);
    } catch (const Error& e) {
        std::cerr << "dirform " << c.command << ": " << to_string(e.code()) << ": " << e.what() << "\n";
        switch (e.code()) {
        case ErrorCode::solver_failure: return kExitSolver;
        case ErrorCode::internal: return kExitInternal;
        default: return kExitInput;
        }
    }
    return kExitInput;
}
