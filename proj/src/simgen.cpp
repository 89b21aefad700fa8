#include "nscreen/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nscreen::sim {

namespace {

enum StreamTag : std::uint64_t { kDesignStream = 1, kCoefficientStream = 2, kNoiseStream = 3 };

void check_rho(double rho) {
    if (!(rho >= 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidRho, "rho must lie in [0, 1)");
}

void check_dims(Index n, Index p) {
    if (n < 1 || p < 1) throw Error(ErrorKind::InvalidDimensions, "n and p must be positive");
}

Matrix standard_normal_rows(Index n, Index p, Rng& rng) {
    Matrix z(n, p);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < p; ++j) z(i, j) = rng.normal();
    }
    return z;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double Rng::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    double u = 0.0, v = 0.0, s = 0.0;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * factor;
    has_cached_ = true;
    return u * factor;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = 0;
    do {
        x = engine_();
    } while (x >= limit);
    return x % bound;
}

const char* to_string(Design design) noexcept {
    return design == Design::Ar1 ? "ar1" : "ma";
}

Design parse_design(const std::string& name) {
    if (name == "ar1") return Design::Ar1;
    if (name == "ma") return Design::MovingAverage;
    throw Error(ErrorKind::InvalidConfig, "unknown design '" + name + "' (expected ar1 or ma)");
}

void SimScenario::validate() const {
    check_dims(n, p);
    check_rho(rho);
    if (T < 1 || T > p || T >= n) throw Error(ErrorKind::InvalidT, "T must satisfy 1 <= T <= p and T < n");
    if (!(R > 1.0)) throw Error(ErrorKind::InvalidConfig, "R must exceed 1");
    if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma must be >= 0");
    if (design == Design::MovingAverage && p < 3) {
        throw Error(ErrorKind::InvalidDimensions, "moving-average design needs p >= 3");
    }
}

Matrix gen_design_ar1(Index n, Index p, double rho, std::uint64_t seed) {
    check_dims(n, p);
    check_rho(rho);
    Rng rng(seed);
    const double innovation = std::sqrt(1.0 - rho * rho);
    Matrix X(n, p);
    for (Index i = 0; i < n; ++i) {
        double prev = rng.normal();
        X(i, 0) = prev;
        for (Index j = 1; j < p; ++j) {
            prev = rho * prev + innovation * rng.normal();
            X(i, j) = prev;
        }
    }
    return X;
}

Matrix gen_design_ma(Index n, Index p, double rho, std::uint64_t seed) {
    check_dims(n, p);
    if (p < 3) throw Error(ErrorKind::InvalidDimensions, "moving-average design needs p >= 3");
    check_rho(rho);
    Rng rng(seed);
    const Matrix z = standard_normal_rows(n, p, rng);
    Matrix X = z;
    for (Index j = 1; j + 1 < p; ++j) {
        X.col(j) += rho * (z.col(j + 1) + z.col(j - 1));
    }
    return X;
}

GroundTruth gen_coefficients(Index p, Index T, double R, std::uint64_t seed) {
    if (T < 1 || T > p) throw Error(ErrorKind::InvalidT, "T must satisfy 1 <= T <= p");
    if (!(R > 1.0)) throw Error(ErrorKind::InvalidConfig, "R must exceed 1");
    Rng rng(seed);

    // Partial Fisher-Yates: the first T slots become a uniform T-subset.
    std::vector<Index> pool(static_cast<std::size_t>(p));
    std::iota(pool.begin(), pool.end(), Index{0});
    for (Index k = 0; k < T; ++k) {
        const auto pick = k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(p - k)));
        std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(pick)]);
    }
    std::vector<Index> support(pool.begin(), pool.begin() + T);
    std::sort(support.begin(), support.end());

    GroundTruth truth;
    truth.beta_star = Vector::Zero(p);
    truth.signs.resize(T);
    for (Index k = 0; k < T; ++k) {
        const double theta = rng.coin() ? 1.0 : -1.0;
        const double kappa = rng.uniform01();
        truth.signs[k] = theta;
        truth.beta_star[support[static_cast<std::size_t>(k)]] = theta * std::pow(R, kappa);
    }
    truth.support = WorkingSet(std::move(support), p);
    return truth;
}

Vector gen_response(const Matrix& X, const Vector& beta_star, double sigma, std::uint64_t seed) {
    if (beta_star.size() != X.cols()) throw Error(ErrorKind::DimensionMismatch, "beta_star length differs from p");
    if (!(sigma >= 0.0)) throw Error(ErrorKind::InvalidConfig, "sigma must be >= 0");
    Vector y = X * beta_star;
    if (sigma > 0.0) {
        Rng rng(seed);
        for (Index i = 0; i < y.size(); ++i) y[i] += sigma * rng.normal();
    }
    return y;
}

SimData generate(const SimScenario& scenario) {
    scenario.validate();
    SimData data;
    const std::uint64_t design_seed = splitmix64(scenario.seed + kDesignStream);
    data.X_raw = scenario.design == Design::Ar1
                     ? gen_design_ar1(scenario.n, scenario.p, scenario.rho, design_seed)
                     : gen_design_ma(scenario.n, scenario.p, scenario.rho, design_seed);
    data.truth = gen_coefficients(scenario.p, scenario.T, scenario.R,
                                  splitmix64(scenario.seed + kCoefficientStream));
    data.y = gen_response(data.X_raw, data.truth.beta_star, scenario.sigma,
                          splitmix64(scenario.seed + kNoiseStream));
    return data;
}

}  // namespace nscreen::sim
