#pragma once

#include <chrono>
#include <optional>
#include <vector>

#include "nscreen/ns_solver.hpp"

namespace nscreen {

inline constexpr double kDefaultAlpha = 8.0 / 13.0;
inline constexpr double kDefaultLambdaBarSlope = 13.0 / 15.0;

struct PathConfig {
    double alpha = kDefaultAlpha;
    int max_knots = 0;  // 0 selects ceil(log(1e-3) / log(alpha))
    double lambda_bar_slope = kDefaultLambdaBarSlope;
    double lambda_bar_offset = 0.0;
    NsConfig ns;  // lambda and lambda_bar are overwritten per knot
    std::optional<Index> support_cap_override;
    /// Explicit decreasing grid; when non-empty it replaces the geometric rule.
    std::vector<double> lambda_grid;

    void validate() const;
    int resolved_max_knots() const;
};

struct PathPoint {
    int m = 0;  // 1-based knot index
    double lambda = 0.0;
    double lambda_bar = 0.0;
    NsResult result;
    std::chrono::duration<double> wall_time{0.0};
};

enum class PathStop { SupportCap, KnotBudget };

const char* to_string(PathStop stop) noexcept;

struct SolutionPath {
    std::vector<PathPoint> points;
    double lambda0 = 0.0;
    Index support_cap = 0;
    PathStop stopped_by = PathStop::KnotBudget;

    /// True when the last point broke the support cap; selection skips it.
    bool last_point_over_cap() const;
};

/// ||X^T y / n||_inf; throws Error(DegenerateResponse) when it is zero.
double lambda_zero(const DesignMatrix& X, const Vector& y);

/// slope * lambda_m + offset, clamped into [0, lambda_m - 1e-12).
double lambda_bar_schedule(double lambda_m, const PathConfig& cfg);

/// floor(n / ln p)
Index support_cap(Index n, Index p);

/// Warm-started sequence of ns_solve calls on lambda_m = lambda0 * alpha^m.
SolutionPath sns_solve_path(const DesignMatrix& X, const Vector& y, const PathConfig& cfg);

/// Index of the point minimizing n log(RSS/n) + |supp| log(n) log(log(p)).
/// Ties go to the larger lambda. A trailing support-cap violator is skipped
/// unless it is the only point.
Index select_information_criterion(const SolutionPath& path, const DesignMatrix& X, const Vector& y);

double information_criterion(const DesignMatrix& X, const Vector& y, const Vector& beta);

}  // namespace nscreen
