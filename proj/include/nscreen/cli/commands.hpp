#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace nscreen::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,          // unreadable input, malformed CSV/JSON, unwritable output
    kExitValidation = 2,  // bad flags, dimension mismatch, invalid configuration
    kExitIterationCap = 3,
    kExitSingular = 4,
    kExitBenchFailures = 5,  // fewer than 90% of replications succeeded
};

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;  // replaying these arguments reproduces the run
    nlohmann::json config_snapshot;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> outputs;
    std::chrono::duration<double> elapsed{0.0};

    nlohmann::json to_json() const;
};

/// `<output>.manifest.json`; gen uses `<prefix>_manifest.json` for its three files.
std::string manifest_path_for(const std::string& output);

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nscreen::cli
