#include "nscreen/sns_path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nscreen {

const char* to_string(PathStop stop) noexcept {
    switch (stop) {
        case PathStop::SupportCap: return "SupportCap";
        case PathStop::KnotBudget: return "KnotBudget";
    }
    return "Unknown";
}

void PathConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidConfig, "alpha must lie in (0, 1)");
    if (max_knots < 0) throw Error(ErrorKind::InvalidConfig, "max_knots must be >= 0");
    if (!(lambda_bar_slope >= 0.0 && lambda_bar_slope < 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "lambda_bar_slope must lie in [0, 1)");
    }
    if (!(lambda_bar_offset >= 0.0)) throw Error(ErrorKind::InvalidConfig, "lambda_bar_offset must be >= 0");
    if (support_cap_override && *support_cap_override < 1) {
        throw Error(ErrorKind::InvalidConfig, "support cap override must be positive");
    }
    for (std::size_t m = 0; m < lambda_grid.size(); ++m) {
        if (!(lambda_grid[m] > 0.0) || (m > 0 && !(lambda_grid[m] < lambda_grid[m - 1]))) {
            throw Error(ErrorKind::InvalidConfig, "explicit lambda grid must be positive and strictly decreasing");
        }
    }
}

int PathConfig::resolved_max_knots() const {
    if (!lambda_grid.empty()) return static_cast<int>(lambda_grid.size());
    if (max_knots > 0) return max_knots;
    return static_cast<int>(std::ceil(std::log(1e-3) / std::log(alpha)));
}

bool SolutionPath::last_point_over_cap() const {
    return stopped_by == PathStop::SupportCap && !points.empty();
}

double lambda_zero(const DesignMatrix& X, const Vector& y) {
    const double l0 = xty_over_n(X, y).lpNorm<Eigen::Infinity>();
    if (!(l0 > 0.0)) throw Error(ErrorKind::DegenerateResponse, "X^T y is zero");
    return l0;
}

double lambda_bar_schedule(double lambda_m, const PathConfig& cfg) {
    const double raw = cfg.lambda_bar_slope * lambda_m + cfg.lambda_bar_offset;
    const double upper = std::max(0.0, lambda_m - 1e-12);
    return std::clamp(raw, 0.0, upper);
}

Index support_cap(Index n, Index p) {
    if (p < 2) throw Error(ErrorKind::InvalidDimensions, "support cap needs p >= 2");
    return static_cast<Index>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(p))));
}

SolutionPath sns_solve_path(const DesignMatrix& X, const Vector& y, const PathConfig& cfg) {
    cfg.validate();
    if (y.size() != X.n()) throw Error(ErrorKind::DimensionMismatch, "y must have length n");

    SolutionPath path;
    path.lambda0 = lambda_zero(X, y);
    path.support_cap = cfg.support_cap_override ? *cfg.support_cap_override : support_cap(X.n(), X.p());
    const int knots = cfg.resolved_max_knots();

    PrimalDualState state = null_state(X, y, path.lambda0);
    double lambda = path.lambda0;
    for (int m = 1; m <= knots; ++m) {
        if (cfg.lambda_grid.empty()) {
            lambda *= cfg.alpha;
        } else {
            lambda = cfg.lambda_grid[static_cast<std::size_t>(m - 1)];
        }
        NsConfig ns = cfg.ns;
        ns.lambda = lambda;
        ns.lambda_bar = lambda_bar_schedule(lambda, cfg);
        if (ns.max_working_set == 0) ns.max_working_set = path.support_cap;

        PathPoint point;
        point.m = m;
        point.lambda = ns.lambda;
        point.lambda_bar = ns.lambda_bar;
        const auto start = std::chrono::steady_clock::now();
        try {
            point.result = ns_solve(X, y, ns, state);
        } catch (const Error& e) {
            throw e.with_context("knot " + std::to_string(m));
        }
        point.wall_time = std::chrono::steady_clock::now() - start;
        state = point.result.state;

        const Index support = count_nonzero(point.result.state.beta);
        path.points.push_back(std::move(point));
        const bool overflow = path.points.back().result.converged_by == StopReason::WorkingSetLimit;
        if (support > path.support_cap || overflow) {
            path.stopped_by = PathStop::SupportCap;
            return path;
        }
    }
    path.stopped_by = PathStop::KnotBudget;
    return path;
}

double information_criterion(const DesignMatrix& X, const Vector& y, const Vector& beta) {
    const double n = static_cast<double>(X.n());
    const double p = static_cast<double>(X.p());
    const double rss = (y - X.values() * beta).squaredNorm();
    const double fit = n * std::log(std::max(rss / n, std::numeric_limits<double>::min()));
    return fit + static_cast<double>(count_nonzero(beta)) * std::log(n) * std::log(std::log(p));
}

Index select_information_criterion(const SolutionPath& path, const DesignMatrix& X, const Vector& y) {
    if (path.points.empty()) throw Error(ErrorKind::EmptyPath, "cannot select from an empty path");
    Index candidates = static_cast<Index>(path.points.size());
    if (path.last_point_over_cap() && candidates > 1) --candidates;

    Index best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (Index m = 0; m < candidates; ++m) {
        const double value = information_criterion(X, y, path.points[static_cast<std::size_t>(m)].result.state.beta);
        if (value < best_value) {
            best_value = value;
            best = m;
        }
    }
    return best;
}

}  // namespace nscreen
