#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "nscreen/core_types.hpp"

namespace nscreen::sim {

/// Stream contract, version 1:
///  - engine: std::mt19937_64 seeded with the 64-bit stream seed;
///  - uniform on [0,1): top 53 bits of one engine draw times 2^-53;
///  - standard normal: Marsaglia polar method over that uniform, caching the
///    second variate of each accepted pair;
///  - bounded integers: rejection sampling on the raw 64-bit draw.
/// Sub-streams of a scenario seed are splitmix64(seed + tag).
inline constexpr const char* kGeneratorName = "mt19937_64/polar-normal/splitmix64-substreams";
inline constexpr int kGeneratorVersion = 1;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01();
    double normal();
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);
    bool coin() { return (engine_() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

enum class Design { Ar1, MovingAverage };

const char* to_string(Design design) noexcept;
Design parse_design(const std::string& name);

struct SimScenario {
    Index n = 300;
    Index p = 5000;
    Index T = 10;
    double R = 10.0;
    double rho = 0.2;
    double sigma = 0.2;
    Design design = Design::Ar1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GroundTruth {
    Vector beta_star;
    WorkingSet support;
    Vector signs;  // length T, entries in {-1, +1}, ordered like support
};

/// Rows i.i.d. N(0, Sigma), Sigma_ij = rho^|i-j|, drawn row by row via the AR(1) recursion.
Matrix gen_design_ar1(Index n, Index p, double rho, std::uint64_t seed);

/// x_j = z_j + rho (z_{j-1} + z_{j+1}) for interior columns; z drawn row by row.
Matrix gen_design_ma(Index n, Index p, double rho, std::uint64_t seed);

/// Uniform T-subset support, beta_i = theta_i R^kappa_i with theta Rademacher and kappa ~ U[0,1].
GroundTruth gen_coefficients(Index p, Index T, double R, std::uint64_t seed);

/// X beta_star + sigma z.
Vector gen_response(const Matrix& X, const Vector& beta_star, double sigma, std::uint64_t seed);

struct SimData {
    Matrix X_raw;
    Vector y;
    GroundTruth truth;
};

/// Draws design, coefficients and noise from the scenario seed's three sub-streams.
SimData generate(const SimScenario& scenario);

}  // namespace nscreen::sim
