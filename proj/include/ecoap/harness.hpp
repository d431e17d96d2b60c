#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ecoap/config.hpp"

namespace ecoap {

/// Seed of trial `trial` at sweep point `value_index`:
///   derive_seed(derive_seed(base, value_index), trial)
/// Injective in `trial` for fixed (base, value_index) and independent of
/// execution order.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t value_index, std::size_t trial);

struct TrialOutcome {
  std::size_t value_index = 0;
  double value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::size_t ue_count = 0;
  std::size_t true_clutter = 0;
  std::size_t true_cluster = 0;
  int clusters_found = 0;
  std::optional<double> pfa;
  std::optional<double> pd;
  int ascent_violations = 0;
  int mean_shift_runs = 0;
  std::optional<int> off_greedy;
  std::optional<int> off_oracle;
};

/// One end-to-end pipeline run: scenario, samples, aggregation, clustering,
/// metrics, and optionally the greedy planner and the oracle. Errors are
/// rethrown with the trial index attached.
TrialOutcome run_trial(const RunConfig& config, int trial_index, std::uint64_t base_seed,
                       std::size_t value_index = 0);

struct ReportRow {
  double value = 0.0;
  int trials = 0;
  std::optional<double> pfa_mean, pfa_stderr;
  std::optional<double> pd_mean, pd_stderr;
  int pfa_undefined = 0;
  int pd_undefined = 0;
  std::optional<double> off_greedy_mean;
  std::optional<double> off_oracle_mean;
};

struct EvalReport {
  std::string varying;
  std::vector<ReportRow> rows;
  std::vector<TrialOutcome> trials;  // completed trials in (value, trial) order
  std::uint64_t base_seed = 0;
  std::string config_hash;
  bool complete = true;
  std::string error;
  long ascent_violations = 0;
  long mean_shift_runs = 0;
};

/// Config for sweep point `value` (the sweep parameter overridden).
RunConfig config_for_value(const RunConfig& base, double value);

/// Mean and standard error over defined values; stderr needs >= 2 samples.
void summarize(const std::vector<std::optional<double>>& xs, std::optional<double>& mean,
               std::optional<double>& stderr_out, int& undefined);

/// Runs every (value, trial) pair, `jobs` at a time. Output does not depend
/// on `jobs`. A failing trial marks the report incomplete; the remaining
/// completed trials are kept.
EvalReport run_sweep(const RunConfig& config, int jobs = 1);

/// Writes report.csv, trials.csv and report.meta into `dir`.
void write_report(const std::filesystem::path& dir, const EvalReport& report, const RunConfig& config);

/// Shortest round-trip decimal form of `v`.
std::string format_number(double v);

}  // namespace ecoap
