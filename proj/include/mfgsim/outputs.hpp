#pragma once

#include <string>

#include "mfgsim/engine.hpp"
#include "mfgsim/scenario.hpp"

namespace mfgsim {

/// Line-delimited event log: tick, kind, agent, part, detail separated by
/// tabs, one record per line, "-" for empty fields.
std::string render_events_log(const RunMetrics& metrics);

/// metrics.csv: fixed header "tick,completed_cum,util:<agent>..." with one
/// row per stride step.
std::string render_metrics_csv(const RunMetrics& metrics, Tick stride);

std::string render_summary(const Scenario& scenario, const RunMetrics& metrics);

/// Machine-readable run descriptor consumed by the compare command.
std::string render_run_meta(const Scenario& scenario, const RunMetrics& metrics,
                            std::uint64_t seed, bool exploration,
                            const std::string& policy_type);

/// Gnuplot script plotting the emitted metrics.csv.
std::string render_plot_script(const RunMetrics& metrics);

/// Write all run artifacts into `out_dir` (created if needed).
void write_run_outputs(const std::string& out_dir, const Scenario& scenario,
                       const RunMetrics& metrics, std::uint64_t seed,
                       bool exploration, const std::string& policy_type);

struct RunOptions {
    std::string scenario;  // path or bundled name
    std::optional<bool> exploration;
    std::optional<std::string> policy_type;  // builtin | service
    std::optional<std::string> service_url;
    std::optional<std::uint64_t> seed;
    std::optional<Tick> horizon;
    std::string out_dir = "out";
    bool dump_snapshots = false;
};

/// Load, run, emit; returns a process exit code and prints a short report.
int run_command(const RunOptions& options);

/// Side-by-side comparison of two run directories produced by run_command.
int compare_command(const std::string& dir_a, const std::string& dir_b);

/// Scenario lint: prints ok or every violation.
int validate_command(const std::string& path);

}  // namespace mfgsim
