#pragma once

#include "run_config.hpp"

#include <iosfwd>

namespace icegnn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Streams for results (out) and log lines (log).
struct Io {
    std::ostream& out;
    std::ostream& log;
};

void cmd_synth(const RunConfig& config, const Io& io);
void cmd_ingest(const RunConfig& config, const Io& io);
void cmd_train(const RunConfig& config, const Io& io);
void cmd_eval(const RunConfig& config, const Io& io);
/// Returns false when any suite fails.
bool cmd_verify(const RunConfig& config, const Io& io);
void cmd_report(const RunConfig& config, const Io& io);

/// Full command line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log);

} // namespace icegnn::cli
