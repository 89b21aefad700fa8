#include "nscreen/bench_metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

namespace nscreen::bench {

namespace {

int signum(double v, double threshold) {
    if (v > threshold) return 1;
    if (v < -threshold) return -1;
    return 0;
}

nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

const char* to_string(Selection s) noexcept {
    return s == Selection::InformationCriterion ? "bic" : "oracle";
}

bool sign_consistent(const Vector& beta_hat, const Vector& beta_star) {
    if (beta_hat.size() != beta_star.size()) {
        throw Error(ErrorKind::DimensionMismatch, "coefficient lengths differ");
    }
    for (Index i = 0; i < beta_hat.size(); ++i) {
        if (signum(beta_hat[i], kSupportThreshold) != signum(beta_star[i], 0.0)) return false;
    }
    return true;
}

TrialMetrics trial_metrics(const Vector& beta_hat, const sim::GroundTruth& truth,
                           std::optional<double> gamma, std::chrono::duration<double> elapsed) {
    const Vector& star = truth.beta_star;
    if (beta_hat.size() != star.size()) throw Error(ErrorKind::DimensionMismatch, "coefficient lengths differ");
    const double star_norm = star.norm();
    if (!(star_norm > 0.0)) throw Error(ErrorKind::ZeroTruth, "relative error undefined for beta* = 0");

    TrialMetrics m;
    const Vector diff = beta_hat - star;
    m.ae = diff.lpNorm<Eigen::Infinity>();
    m.re = diff.norm() / star_norm;
    const WorkingSet est = support_of(beta_hat, kSupportThreshold);
    m.support_size = est.size();
    m.exact_support = est.indices() == truth.support.indices();
    m.sign_consistent = sign_consistent(beta_hat, star);
    m.wall_time = elapsed;
    if (gamma) m.linf_within_bound = m.ae < (14.0 / 3.0) * *gamma;
    return m;
}

double coherence(const DesignMatrix& X) {
    if (X.p() < 2) return 0.0;
    Matrix gram = Matrix::Zero(X.p(), X.p());
    gram.selfadjointView<Eigen::Lower>().rankUpdate(X.values().transpose(), 1.0 / static_cast<double>(X.n()));
    double nu = 0.0;
    for (Index j = 0; j < X.p(); ++j) {
        for (Index i = j + 1; i < X.p(); ++i) nu = std::max(nu, std::abs(gram(i, j)));
    }
    return nu;
}

double gamma_n(double sigma, Index n, Index p) {
    return sigma * std::sqrt(4.0 * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

ConditionReport check_conditions(const DesignMatrix& X, const sim::GroundTruth& truth, double sigma) {
    if (truth.beta_star.size() != X.p()) throw Error(ErrorKind::DimensionMismatch, "beta* length differs from p");
    ConditionReport r;
    r.nu = coherence(X);
    r.t_nu = static_cast<double>(truth.support.size()) * r.nu;
    r.gamma_n = gamma_n(sigma, X.n(), X.p());
    r.c3_ok = r.t_nu <= 0.25;

    const Vector scaled = X.to_normalized_scale(truth.beta_star);
    double beta_min = std::numeric_limits<double>::infinity();
    for (Index j : truth.support.indices()) beta_min = std::min(beta_min, std::abs(scaled[j]));
    r.c1_ok = beta_min >= 78.0 * r.gamma_n;
    r.beta_min_ratio = r.gamma_n > 0.0 ? beta_min / (78.0 * r.gamma_n) : std::numeric_limits<double>::infinity();
    return r;
}

Index select_best_on_path(const SolutionPath& path, const DesignMatrix& X, const Vector& beta_star) {
    if (path.points.empty()) throw Error(ErrorKind::EmptyPath, "cannot select from an empty path");
    Index candidates = static_cast<Index>(path.points.size());
    if (path.last_point_over_cap() && candidates > 1) --candidates;
    Index best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (Index m = 0; m < candidates; ++m) {
        const Vector raw = X.to_raw_scale(path.points[static_cast<std::size_t>(m)].result.state.beta);
        const double err = (raw - beta_star).lpNorm<Eigen::Infinity>();
        if (err < best_err) {
            best_err = err;
            best = m;
        }
    }
    return best;
}

TrialRow run_trial(const sim::SimScenario& scenario, const PathConfig& path_cfg, Selection selection) {
    TrialRow row;
    row.seed = scenario.seed;
    try {
        const sim::SimData data = sim::generate(scenario);
        const DesignMatrix X = DesignMatrix::normalize_columns(data.X_raw);

        const auto start = std::chrono::steady_clock::now();
        const SolutionPath path = sns_solve_path(X, data.y, path_cfg);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

        row.path_length = static_cast<Index>(path.points.size());
        row.stopped_by = path.stopped_by;
        row.selected_index = selection == Selection::InformationCriterion
                                 ? select_information_criterion(path, X, data.y)
                                 : select_best_on_path(path, X, data.truth.beta_star);
        const PathPoint& chosen = path.points[static_cast<std::size_t>(row.selected_index)];
        row.selected_lambda = chosen.lambda;

        const double gamma = gamma_n(scenario.sigma, scenario.n, scenario.p);
        row.metrics = trial_metrics(X.to_raw_scale(chosen.result.state.beta), data.truth, gamma, elapsed);
        for (const PathPoint& point : path.points) {
            const Vector raw = X.to_raw_scale(point.result.state.beta);
            if (sign_consistent(raw, data.truth.beta_star) &&
                (raw - data.truth.beta_star).lpNorm<Eigen::Infinity>() < (14.0 / 3.0) * gamma) {
                row.path_hits_bound = true;
                break;
            }
        }
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
    }
    return row;
}

Aggregate aggregate_rows(const std::vector<TrialRow>& rows) {
    Aggregate agg;
    for (const TrialRow& row : rows) {
        if (row.failed) {
            ++agg.failures;
            continue;
        }
        ++agg.successes;
        agg.ae += row.metrics.ae;
        agg.re += row.metrics.re;
        agg.rp += row.metrics.exact_support ? 1.0 : 0.0;
        agg.mean_support += static_cast<double>(row.metrics.support_size);
        agg.time_s += row.metrics.wall_time.count();
        agg.path_hit_rate += row.path_hits_bound ? 1.0 : 0.0;
    }
    if (agg.successes > 0) {
        const double k = static_cast<double>(agg.successes);
        agg.ae /= k;
        agg.re /= k;
        agg.rp /= k;
        agg.mean_support /= k;
        agg.time_s /= k;
        agg.path_hit_rate /= k;
    }
    return agg;
}

ReplicationReport run_replications(const sim::SimScenario& scenario, int reps, const PathConfig& path_cfg,
                                   Selection selection, int threads) {
    if (reps < 1) throw Error(ErrorKind::InvalidConfig, "reps must be >= 1");
    scenario.validate();
    path_cfg.validate();

    ReplicationReport report;
    report.scenario = scenario;
    report.reps = reps;
    report.selection = selection;
    report.path_cfg = path_cfg;
    report.rows.resize(static_cast<std::size_t>(reps));

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
            sim::SimScenario s = scenario;
            s.seed = scenario.seed + static_cast<std::uint64_t>(r);
            TrialRow row = run_trial(s, path_cfg, selection);
            row.replication = r;
            report.rows[static_cast<std::size_t>(r)] = std::move(row);
        }
    };
    const int workers = std::clamp(threads, 1, reps);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    report.aggregate = aggregate_rows(report.rows);
    return report;
}

nlohmann::json to_json(const ConditionReport& r) {
    return {{"nu", r.nu},
            {"t_nu", r.t_nu},
            {"gamma_n", r.gamma_n},
            {"c1_ok", r.c1_ok},
            {"c3_ok", r.c3_ok},
            {"beta_min_ratio", finite_or_null(r.beta_min_ratio)}};
}

nlohmann::json to_json(const ReplicationReport& report) {
    using nlohmann::json;
    const sim::SimScenario& s = report.scenario;
    json out;
    out["method"] = "SNS";
    out["selection"] = to_string(report.selection);
    out["scenario"] = {{"n", s.n},     {"p", s.p},         {"T", s.T},
                       {"R", s.R},     {"rho", s.rho},     {"sigma", s.sigma},
                       {"design", sim::to_string(s.design)}, {"seed", s.seed}};
    out["path"] = {{"alpha", report.path_cfg.alpha},
                   {"max_knots", report.path_cfg.resolved_max_knots()},
                   {"lambda_bar_slope", report.path_cfg.lambda_bar_slope},
                   {"lambda_bar_offset", report.path_cfg.lambda_bar_offset},
                   {"max_iter", report.path_cfg.ns.max_iter},
                   {"ls", to_string(report.path_cfg.ns.ls_method)}};
    out["generator"] = {{"name", sim::kGeneratorName},
                        {"version", sim::kGeneratorVersion},
                        {"columns_normalized_before_solving", true}};
    out["reps"] = report.reps;

    json rows = json::array();
    for (const TrialRow& row : report.rows) {
        json j = {{"replication", row.replication}, {"seed", row.seed}, {"failed", row.failed}};
        if (row.failed) {
            j["error"] = row.error;
        } else {
            const TrialMetrics& m = row.metrics;
            j["ae"] = m.ae;
            j["re"] = m.re;
            j["exact_support"] = m.exact_support;
            j["support_size"] = m.support_size;
            j["sign_consistent"] = m.sign_consistent;
            j["linf_within_bound"] = m.linf_within_bound ? json(*m.linf_within_bound) : json(nullptr);
            j["path_hits_bound"] = row.path_hits_bound;
            j["selected_index"] = row.selected_index;
            j["selected_lambda"] = row.selected_lambda;
            j["path_length"] = row.path_length;
            j["stopped_by"] = to_string(row.stopped_by);
            j["time_s"] = m.wall_time.count();
        }
        rows.push_back(std::move(j));
    }
    out["trials"] = std::move(rows);

    const Aggregate& a = report.aggregate;
    out["aggregate"] = {{"ae", a.ae},
                        {"re", a.re},
                        {"rp", a.rp},
                        {"mean", a.mean_support},
                        {"path_hit_rate", a.path_hit_rate},
                        {"successes", a.successes},
                        {"failures", a.failures},
                        {"time_s", a.time_s}};
    return out;
}

std::string format_table(const ReplicationReport& report) {
    const Aggregate& a = report.aggregate;
    char line[256];
    std::ostringstream os;
    os << "# rho=" << report.scenario.rho << " sigma=" << report.scenario.sigma << " n=" << report.scenario.n
       << " p=" << report.scenario.p << " T=" << report.scenario.T << " reps=" << report.reps
       << " selection=" << to_string(report.selection) << " (RE shown x 1e-2)\n";
    std::snprintf(line, sizeof line, "%-8s %8s %10s %6s %8s %9s\n", "Method", "AE", "RE(1e-2)", "RP", "MEAN",
                  "Time(s)");
    os << line;
    std::snprintf(line, sizeof line, "%-8s %8.4f %10.4f %6.2f %8.2f %9.4f\n", "SNS", a.ae, a.re * 100.0, a.rp,
                  a.mean_support, a.time_s);
    os << line;
    if (a.failures > 0) os << "# failed replications: " << a.failures << "\n";
    return os.str();
}

}  // namespace nscreen::bench
