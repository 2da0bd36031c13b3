#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace hlflock {

/// Shared command-line options after parsing.
struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::string format = "csv";  // "csv" or "json"
    std::optional<std::uint64_t> replicas;
    std::optional<std::int64_t> horizon;
    int threads = 0;
    bool absolute = false;  // run: emit absolute-frame trajectory
    int traces = 0;         // ensemble: also write this many replica traces
};

/// Exit codes: 0 ok, 2 config error, 3 io error, 4 invariant violation.
/// Unexpected exceptions map to 1 in main.
int cmd_run(const CliOptions& opt);
int cmd_verify(const CliOptions& opt);
int cmd_ensemble(const CliOptions& opt);
int cmd_sweep(const CliOptions& opt);

}  // namespace hlflock
