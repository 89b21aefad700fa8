#include "nscreen/cli/commands.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "nscreen/bench_metrics.hpp"
#include "nscreen/cli/csv_io.hpp"
#include "nscreen/ns_solver.hpp"
#include "nscreen/prox_kkt.hpp"
#include "nscreen/simgen.hpp"
#include "nscreen/sns_path.hpp"

namespace nscreen::cli {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

json to_json_vector(const Vector& v) {
    return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json to_json_indices(const WorkingSet& s) {
    return json(s.indices());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream file(path);
    if (!file) throw io::IoError("cannot write " + path);
    file << text;
    if (!file) throw io::IoError("write failed for " + path);
}

json read_json_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw io::IoError("cannot open " + path);
    try {
        return json::parse(file);
    } catch (const json::exception& e) {
        throw io::IoError(path + ": " + e.what());
    }
}

LsMethod parse_ls(const std::string& name) {
    if (name == "auto") return LsMethod::Auto;
    if (name == "direct") return LsMethod::Direct;
    return LsMethod::ConjugateGradient;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("NS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

struct LoadedProblem {
    DesignMatrix X;
    Vector y;
};

LoadedProblem load_problem(const std::string& x_path, const std::string& y_path) {
    const Matrix raw = io::read_matrix_csv(x_path);
    Vector y = io::read_vector_csv(y_path);
    if (y.size() != raw.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "y has " + std::to_string(y.size()) + " entries but X has " +
                                                      std::to_string(raw.rows()) + " rows");
    }
    return {DesignMatrix::normalize_columns(raw), std::move(y)};
}

// ---------------------------------------------------------------- solve

struct SolveOptions {
    std::string x, y, out, init_beta, init_d, manifest;
    double lambda = 0.0;
    double lambda_bar = 0.0;
    int max_iter = 50;
    std::string ls = "auto";
    double cg_tol = 1e-10;
    double ridge_epsilon = 0.0;
};

struct PathOptions {
    std::string x, y, out, manifest;
    double alpha = kDefaultAlpha;
    int max_knots = 0;
    double slope = kDefaultLambdaBarSlope;
    double offset = 0.0;
    bool plain_lasso = false;
    std::string select = "none";
    int max_iter = 50;
    std::string ls = "auto";
};

struct ScenarioOptions {
    long long n = 300;
    long long p = 5000;
    long long t = 10;
    double r = 10.0;
    double rho = 0.2;
    double sigma = 0.2;
    std::string design = "ar1";
    std::uint64_t seed = 0;

    sim::SimScenario scenario() const {
        sim::SimScenario s;
        s.n = n;
        s.p = p;
        s.T = t;
        s.R = r;
        s.rho = rho;
        s.sigma = sigma;
        s.design = sim::parse_design(design);
        s.seed = seed;
        return s;
    }
};

struct GenOptions {
    ScenarioOptions scenario;
    std::string prefix;
};

struct BenchOptions {
    ScenarioOptions scenario;
    PathOptions path;
    int reps = 100;
    std::string selection = "oracle";
    int threads = 0;
    std::string out, manifest;
};

struct CheckOptions {
    std::string x, truth, manifest;
    double sigma = -1.0;
    long long t = -1;
};

json scenario_json(const sim::SimScenario& s) {
    return {{"n", s.n},         {"p", s.p},         {"T", s.T},
            {"R", s.R},         {"rho", s.rho},     {"sigma", s.sigma},
            {"design", sim::to_string(s.design)},   {"seed", s.seed}};
}

PathConfig build_path_config(const PathOptions& o) {
    PathConfig cfg;
    cfg.alpha = o.alpha;
    cfg.max_knots = o.max_knots;
    cfg.lambda_bar_slope = o.plain_lasso ? 0.0 : o.slope;
    cfg.lambda_bar_offset = o.plain_lasso ? 0.0 : o.offset;
    cfg.ns.max_iter = o.max_iter;
    cfg.ns.ls_method = parse_ls(o.ls);
    return cfg;
}

json path_config_json(const PathConfig& cfg) {
    return {{"alpha", cfg.alpha},
            {"max_knots", cfg.resolved_max_knots()},
            {"lambda_bar_slope", cfg.lambda_bar_slope},
            {"lambda_bar_offset", cfg.lambda_bar_offset},
            {"max_iter", cfg.ns.max_iter},
            {"ls", to_string(cfg.ns.ls_method)}};
}

void write_manifest(const std::string& path, RunManifest manifest, Clock::time_point start) {
    manifest.elapsed = Clock::now() - start;
    write_text(path, manifest.to_json().dump(2) + "\n");
}

int cmd_solve(const SolveOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto start = Clock::now();
    const LoadedProblem problem = load_problem(o.x, o.y);
    const DesignMatrix& X = problem.X;

    NsConfig cfg;
    cfg.lambda = o.lambda;
    cfg.lambda_bar = o.lambda_bar;
    cfg.max_iter = o.max_iter;
    cfg.ls_method = parse_ls(o.ls);
    cfg.cg_tol = o.cg_tol;
    cfg.ridge_epsilon = o.ridge_epsilon;
    cfg.validate();

    PrimalDualState init = null_state(X, problem.y, cfg.lambda, cfg.lambda_bar);
    if (!o.init_beta.empty()) {
        const Vector raw = io::read_vector_csv(o.init_beta);
        if (raw.size() != X.p()) throw Error(ErrorKind::DimensionMismatch, "init-beta length differs from p");
        init.beta = X.to_normalized_scale(raw);
        init.d = dual_variable(X, problem.y, init.beta);
    }
    if (!o.init_d.empty()) {
        init.d = io::read_vector_csv(o.init_d);
        if (init.d.size() != X.p()) throw Error(ErrorKind::DimensionMismatch, "init-d length differs from p");
    }

    const auto solve_start = Clock::now();
    const NsResult result = ns_solve(X, problem.y, cfg, init);
    const std::chrono::duration<double, std::milli> solve_ms = Clock::now() - solve_start;

    const Vector& beta = result.state.beta;
    ordered_json doc = {{"lambda", cfg.lambda},
                        {"lambda_bar", cfg.lambda_bar},
                        {"beta", to_json_vector(X.to_raw_scale(beta))},
                        {"beta_normalized", to_json_vector(beta)},
                        {"support", to_json_indices(support_of(beta))},
                        {"d", to_json_vector(result.state.d)},
                        {"iterations", result.iterations},
                        {"converged_by", to_string(result.converged_by)},
                        {"kkt_residual", result.kkt.residual_inf},
                        {"dual_feasibility", result.kkt.dual_feasibility},
                        {"objective", result.kkt.objective},
                        {"time_ms", solve_ms.count()}};
    const std::string text = doc.dump() + "\n";

    RunManifest manifest;
    manifest.command = "solve";
    manifest.argv = argv;
    manifest.config_snapshot = {{"x", o.x},
                                {"y", o.y},
                                {"lambda", cfg.lambda},
                                {"lambda_bar", cfg.lambda_bar},
                                {"max_iter", cfg.max_iter},
                                {"ls", o.ls},
                                {"cg_tol", cfg.cg_tol},
                                {"ridge_epsilon", cfg.ridge_epsilon},
                                {"init_beta", o.init_beta},
                                {"init_d", o.init_d}};
    if (o.out.empty()) {
        out << text;
        if (!o.manifest.empty()) write_manifest(o.manifest, manifest, start);
    } else {
        write_text(o.out, text);
        manifest.outputs = {o.out};
        write_manifest(o.manifest.empty() ? manifest_path_for(o.out) : o.manifest, manifest, start);
    }
    return result.converged_by == StopReason::IterationCap ? kExitIterationCap : kExitOk;
}

// ---------------------------------------------------------------- path

int cmd_path(const PathOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto start = Clock::now();
    const LoadedProblem problem = load_problem(o.x, o.y);
    const PathConfig cfg = build_path_config(o);
    const SolutionPath path = sns_solve_path(problem.X, problem.y, cfg);

    std::string text;
    bool capped = false;
    for (const PathPoint& point : path.points) {
        const Vector raw = problem.X.to_raw_scale(point.result.state.beta);
        json nonzero = json::array();
        for (Index j = 0; j < raw.size(); ++j) {
            if (raw[j] != 0.0) nonzero.push_back({j, raw[j]});
        }
        ordered_json line = {{"m", point.m},
                             {"lambda", point.lambda},
                             {"lambda_bar", point.lambda_bar},
                             {"support", count_nonzero(point.result.state.beta)},
                             {"beta_nonzero", std::move(nonzero)},
                             {"iterations", point.result.iterations},
                             {"converged_by", to_string(point.result.converged_by)},
                             {"kkt_residual", point.result.kkt.residual_inf},
                             {"time_ms", std::chrono::duration<double, std::milli>(point.wall_time).count()}};
        if (point.result.rejected_set_size > 0) line["rejected_working_set"] = point.result.rejected_set_size;
        capped = capped || point.result.converged_by == StopReason::IterationCap;
        text += line.dump() + "\n";
    }
    ordered_json footer = {{"footer", true},
                           {"stopped_by", to_string(path.stopped_by)},
                           {"lambda0", path.lambda0},
                           {"support_cap", path.support_cap},
                           {"knots", path.points.size()}};
    if (o.select == "bic") {
        const Index best = select_information_criterion(path, problem.X, problem.y);
        footer["selected"] = path.points[static_cast<std::size_t>(best)].m;
    }
    text += footer.dump() + "\n";

    RunManifest manifest;
    manifest.command = "path";
    manifest.argv = argv;
    manifest.config_snapshot = path_config_json(cfg);
    manifest.config_snapshot["x"] = o.x;
    manifest.config_snapshot["y"] = o.y;
    manifest.config_snapshot["select"] = o.select;
    if (o.out.empty()) {
        out << text;
        if (!o.manifest.empty()) write_manifest(o.manifest, manifest, start);
    } else {
        write_text(o.out, text);
        manifest.outputs = {o.out};
        write_manifest(o.manifest.empty() ? manifest_path_for(o.out) : o.manifest, manifest, start);
    }
    return capped ? kExitIterationCap : kExitOk;
}

// ---------------------------------------------------------------- gen

int cmd_gen(const GenOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto start = Clock::now();
    const sim::SimScenario scenario = o.scenario.scenario();
    scenario.validate();
    const sim::SimData data = sim::generate(scenario);

    const std::string x_path = o.prefix + "_X.csv";
    const std::string y_path = o.prefix + "_y.csv";
    const std::string truth_path = o.prefix + "_truth.json";
    io::write_matrix_csv(x_path, data.X_raw);
    io::write_vector_csv(y_path, data.y);
    const json truth = {{"scenario", scenario_json(scenario)},
                        {"beta_star", to_json_vector(data.truth.beta_star)},
                        {"support", to_json_indices(data.truth.support)},
                        {"signs", to_json_vector(data.truth.signs)},
                        {"generator", {{"name", sim::kGeneratorName}, {"version", sim::kGeneratorVersion}}}};
    write_text(truth_path, truth.dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "gen";
    manifest.argv = argv;
    manifest.config_snapshot = scenario_json(scenario);
    manifest.config_snapshot["out_prefix"] = o.prefix;
    manifest.seeds = {scenario.seed};
    manifest.outputs = {x_path, y_path, truth_path};
    write_manifest(o.prefix + "_manifest.json", manifest, start);
    out << "wrote " << x_path << ", " << y_path << ", " << truth_path << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const BenchOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto start = Clock::now();
    const sim::SimScenario scenario = o.scenario.scenario();
    const PathConfig cfg = build_path_config(o.path);
    const bench::Selection selection =
        o.selection == "bic" ? bench::Selection::InformationCriterion : bench::Selection::BestOnPathOracle;
    const int threads = resolve_threads(o.threads);

    const bench::ReplicationReport report = bench::run_replications(scenario, o.reps, cfg, selection, threads);
    out << bench::format_table(report);

    RunManifest manifest;
    manifest.command = "bench";
    manifest.argv = argv;
    manifest.config_snapshot = {{"scenario", scenario_json(scenario)},
                                {"path", path_config_json(cfg)},
                                {"reps", o.reps},
                                {"selection", o.selection},
                                {"threads", threads}};
    for (int r = 0; r < o.reps; ++r) manifest.seeds.push_back(scenario.seed + static_cast<std::uint64_t>(r));
    if (!o.out.empty()) {
        write_text(o.out, bench::to_json(report).dump(2) + "\n");
        manifest.outputs = {o.out};
        write_manifest(o.manifest.empty() ? manifest_path_for(o.out) : o.manifest, manifest, start);
    } else if (!o.manifest.empty()) {
        write_manifest(o.manifest, manifest, start);
    }

    const int ok = report.aggregate.successes;
    return 10 * ok >= 9 * o.reps ? kExitOk : kExitBenchFailures;
}

// ---------------------------------------------------------------- check

sim::GroundTruth read_truth(const std::string& path, Index p, double* sigma_out) {
    const json doc = read_json_file(path);
    try {
        const auto beta = doc.at("beta_star").get<std::vector<double>>();
        if (static_cast<Index>(beta.size()) != p) {
            throw Error(ErrorKind::DimensionMismatch, "truth beta_star length differs from p");
        }
        sim::GroundTruth truth;
        truth.beta_star = Eigen::Map<const Vector>(beta.data(), static_cast<Index>(beta.size()));
        truth.support = WorkingSet(doc.at("support").get<std::vector<Index>>(), p);
        if (doc.contains("scenario") && doc["scenario"].contains("sigma")) {
            *sigma_out = doc["scenario"]["sigma"].get<double>();
        }
        return truth;
    } catch (const json::exception& e) {
        throw io::IoError(path + ": " + e.what());
    }
}

int cmd_check(const CheckOptions& o, const std::vector<std::string>& argv, std::ostream& out) {
    const auto start = Clock::now();
    const DesignMatrix X = DesignMatrix::normalize_columns(io::read_matrix_csv(o.x));

    double sigma = o.sigma;
    json doc;
    if (!o.truth.empty()) {
        double truth_sigma = -1.0;
        const sim::GroundTruth truth = read_truth(o.truth, X.p(), &truth_sigma);
        if (sigma < 0.0) sigma = truth_sigma;
        doc = bench::to_json(bench::check_conditions(X, truth, std::max(sigma, 0.0)));
        if (o.t >= 0) {
            doc["t_nu"] = static_cast<double>(o.t) * doc["nu"].get<double>();
            doc["c3_ok"] = doc["t_nu"].get<double>() <= 0.25;
        }
    } else {
        const double nu = bench::coherence(X);
        const double t_nu = o.t >= 0 ? static_cast<double>(o.t) * nu : nu;
        doc = {{"nu", nu},
               {"t_nu", t_nu},
               {"gamma_n", sigma >= 0.0 ? bench::gamma_n(sigma, X.n(), X.p()) : 0.0},
               {"c1_ok", nullptr},
               {"c3_ok", o.t >= 0 ? json(t_nu <= 0.25) : json(nullptr)},
               {"beta_min_ratio", nullptr}};
    }
    out << doc.dump(2) << "\n";

    if (!o.manifest.empty()) {
        RunManifest manifest;
        manifest.command = "check";
        manifest.argv = argv;
        manifest.config_snapshot = {{"x", o.x}, {"truth", o.truth}, {"sigma", o.sigma}, {"t", o.t}};
        write_manifest(o.manifest, manifest, start);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- wiring

void add_scenario_flags(CLI::App* cmd, ScenarioOptions& s) {
    cmd->add_option("--n", s.n, "Sample size")->capture_default_str();
    cmd->add_option("--p", s.p, "Number of predictors")->capture_default_str();
    cmd->add_option("--t", s.t, "Support size T")->capture_default_str();
    cmd->add_option("--r", s.r, "Signal range R")->capture_default_str();
    cmd->add_option("--rho", s.rho, "Design correlation")->capture_default_str();
    cmd->add_option("--sigma", s.sigma, "Noise level")->capture_default_str();
    cmd->add_option("--design", s.design, "Design family")
        ->check(CLI::IsMember({"ar1", "ma"}))
        ->capture_default_str();
    cmd->add_option("--seed", s.seed, "Base seed")->capture_default_str();
}

void add_path_flags(CLI::App* cmd, PathOptions& o) {
    cmd->add_option("--alpha", o.alpha, "Geometric grid ratio")->capture_default_str();
    cmd->add_option("--max-knots", o.max_knots, "Knot budget; 0 picks ceil(log(1e-3)/log(alpha))")
        ->capture_default_str();
    cmd->add_option("--lambda-bar-slope", o.slope, "lambda_bar = slope * lambda + offset")->capture_default_str();
    cmd->add_option("--lambda-bar-offset", o.offset)->capture_default_str();
    cmd->add_flag("--plain-lasso", o.plain_lasso, "Set slope and offset to 0");
    cmd->add_option("--max-iter", o.max_iter, "NS iterations per knot")->capture_default_str();
    cmd->add_option("--ls", o.ls)->check(CLI::IsMember({"auto", "direct", "cg"}))->capture_default_str();
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Newton screening Lasso solver", "nscreen"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::function<int()> action;

    SolveOptions solve;
    auto* s = app.add_subcommand("solve", "Solve one Lasso problem with the screening Newton iteration");
    s->add_option("--x", solve.x, "Design CSV")->required();
    s->add_option("--y", solve.y, "Response CSV")->required();
    s->add_option("--lambda", solve.lambda)->required();
    s->add_option("--lambda-bar", solve.lambda_bar)->capture_default_str();
    s->add_option("--max-iter", solve.max_iter)->capture_default_str();
    s->add_option("--ls", solve.ls)->check(CLI::IsMember({"auto", "direct", "cg"}))->capture_default_str();
    s->add_option("--init-beta", solve.init_beta, "Initial coefficients (raw scale)");
    s->add_option("--init-d", solve.init_d, "Initial dual variable");
    s->add_option("--cg-tol", solve.cg_tol)->capture_default_str();
    s->add_option("--ridge-epsilon", solve.ridge_epsilon)->capture_default_str();
    s->add_option("--out", solve.out, "Output JSON (default stdout)");
    s->add_option("--manifest", solve.manifest, "Manifest path");
    s->callback([&] { action = [&] { return cmd_solve(solve, args, out); }; });

    PathOptions path;
    auto* pc = app.add_subcommand("path", "Compute a warm-started solution path");
    pc->add_option("--x", path.x)->required();
    pc->add_option("--y", path.y)->required();
    add_path_flags(pc, path);
    pc->add_option("--select", path.select)->check(CLI::IsMember({"bic", "none"}))->capture_default_str();
    pc->add_option("--out", path.out, "Output JSON-lines (default stdout)");
    pc->add_option("--manifest", path.manifest);
    pc->callback([&] { action = [&] { return cmd_path(path, args, out); }; });

    GenOptions gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic regression problem");
    add_scenario_flags(g, gen.scenario);
    g->add_option("--out-prefix", gen.prefix)->required();
    g->callback([&] { action = [&] { return cmd_gen(gen, args, out); }; });

    BenchOptions bench;
    auto* b = app.add_subcommand("bench", "Run replicated simulations and report AE/RE/RP/MEAN/Time");
    add_scenario_flags(b, bench.scenario);
    add_path_flags(b, bench.path);
    b->add_option("--reps", bench.reps)->capture_default_str();
    b->add_option("--selection", bench.selection)
        ->check(CLI::IsMember({"bic", "oracle"}))
        ->capture_default_str();
    b->add_option("--threads", bench.threads, "Worker threads (default NS_THREADS or all cores)");
    b->add_option("--out", bench.out, "Report JSON");
    b->add_option("--manifest", bench.manifest);
    b->callback([&] { action = [&] { return cmd_bench(bench, args, out); }; });

    CheckOptions check;
    auto* c = app.add_subcommand("check", "Report coherence and signal-strength conditions");
    c->add_option("--x", check.x)->required();
    c->add_option("--truth", check.truth, "Truth JSON written by gen");
    c->add_option("--sigma", check.sigma, "Noise level (default: from truth)");
    c->add_option("--t", check.t, "Support size used for T*nu (default: from truth)");
    c->add_option("--manifest", check.manifest);
    c->callback([&] { action = [&] { return cmd_check(check, args, out); }; });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }
    return action();
}

}  // namespace

json RunManifest::to_json() const {
    return {{"command", command},
            {"argv", argv},
            {"config_snapshot", config_snapshot},
            {"seeds", seeds},
            {"outputs", outputs},
            {"tool_version", kToolVersion},
            {"elapsed_s", elapsed.count()}};
}

std::string manifest_path_for(const std::string& output) {
    return output + ".manifest.json";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const io::IoError& e) {
        err << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        const bool singular = e.kind() == ErrorKind::SingularSystem || e.kind() == ErrorKind::SingularNewtonSystem;
        return singular ? kExitSingular : kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace nscreen::cli
