#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nscreen/simgen.hpp"
#include "nscreen/sns_path.hpp"

namespace nscreen::bench {

/// |beta_i| above this counts as nonzero when extracting supports.
inline constexpr double kSupportThreshold = 1e-10;

struct TrialMetrics {
    double ae = 0.0;  // ||beta_hat - beta*||_inf
    double re = 0.0;  // ||beta_hat - beta*||_2 / ||beta*||_2
    bool exact_support = false;
    Index support_size = 0;
    std::chrono::duration<double> wall_time{0.0};
    bool sign_consistent = false;
    std::optional<bool> linf_within_bound;  // ae < (14/3) gamma_n, when gamma_n is known
};

struct ConditionReport {
    double nu = 0.0;
    double t_nu = 0.0;
    double gamma_n = 0.0;
    bool c1_ok = false;
    bool c3_ok = false;
    double beta_min_ratio = 0.0;  // min |beta*_A| / (78 gamma_n); +inf when gamma_n == 0
};

/// Throws Error(ZeroTruth) when beta* is zero.
TrialMetrics trial_metrics(const Vector& beta_hat, const sim::GroundTruth& truth,
                           std::optional<double> gamma_n, std::chrono::duration<double> elapsed);

/// sign(beta_hat) == sign(beta*) componentwise, zeros matching zeros.
bool sign_consistent(const Vector& beta_hat, const Vector& beta_star);

/// max_{i != j} |x_i^T x_j| / n on the normalized design.
double coherence(const DesignMatrix& X);

/// sigma * sqrt(4 ln p / n)
double gamma_n(double sigma, Index n, Index p);

/// Signals are compared on the normalized scale (beta* times column scales).
ConditionReport check_conditions(const DesignMatrix& X, const sim::GroundTruth& truth, double sigma);

enum class Selection { InformationCriterion, BestOnPathOracle };

const char* to_string(Selection s) noexcept;

/// Point with the smallest ||beta_hat - beta*||_inf (raw scale); skips a
/// trailing support-cap violator unless it is the only point.
Index select_best_on_path(const SolutionPath& path, const DesignMatrix& X, const Vector& beta_star);

struct TrialRow {
    int replication = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    TrialMetrics metrics;
    Index selected_index = -1;
    double selected_lambda = 0.0;
    Index path_length = 0;
    PathStop stopped_by = PathStop::KnotBudget;
    /// Some path point is sign consistent with error below (14/3) gamma_n.
    bool path_hits_bound = false;
};

struct Aggregate {
    double ae = 0.0;
    double re = 0.0;
    double rp = 0.0;
    double mean_support = 0.0;
    double time_s = 0.0;
    double path_hit_rate = 0.0;
    int successes = 0;
    int failures = 0;
};

struct ReplicationReport {
    sim::SimScenario scenario;
    int reps = 0;
    Selection selection = Selection::BestOnPathOracle;
    PathConfig path_cfg;
    std::vector<TrialRow> rows;
    Aggregate aggregate;
};

/// One generate / normalize / path / select / score cycle for one seed.
TrialRow run_trial(const sim::SimScenario& scenario, const PathConfig& path_cfg, Selection selection);

/// Replication r uses seed scenario.seed + r. Rows come back ordered by r
/// regardless of `threads`.
ReplicationReport run_replications(const sim::SimScenario& scenario, int reps, const PathConfig& path_cfg,
                                   Selection selection, int threads = 1);

Aggregate aggregate_rows(const std::vector<TrialRow>& rows);

nlohmann::json to_json(const ReplicationReport& report);
nlohmann::json to_json(const ConditionReport& report);

/// Fixed-width table: Method, AE, RE (x 1e-2), RP, MEAN, Time(s).
std::string format_table(const ReplicationReport& report);

}  // namespace nscreen::bench
