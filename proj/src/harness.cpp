#include "ecoap/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <omp.h>

#include "ecoap/error.hpp"
#include "ecoap/rng.hpp"

namespace ecoap {

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t value_index, std::size_t trial) {
  return derive_seed(derive_seed(base_seed, value_index), trial);
}

TrialOutcome run_trial(const RunConfig& cfg, int trial_index, std::uint64_t base_seed, std::size_t value_index) {
  TrialOutcome out;
  out.value_index = value_index;
  out.trial = trial_index;
  out.seed = trial_seed(base_seed, value_index, static_cast<std::size_t>(trial_index));
  try {
    const GroundTruthScenario sc = sample_scenario(cfg.scenario, out.seed);
    out.ue_count = sc.ues.size();
    for (int label : sc.true_label) (label == kClutter ? out.true_clutter : out.true_cluster)++;

    RssMatrix matrix;
    if (sc.ues.empty()) {
      for (const auto& ap : sc.aps) {
        matrix.ap_ids.push_back(ap.id);
        matrix.ref_power.push_back(ap.tx_power);
      }
    } else {
      const RssSampleSet samples = generate_samples(sc, cfg.propagation, cfg.sampling.samples_per_link, out.seed,
                                                    cfg.sampling.noise);
      matrix = aggregate(samples, cfg.ingest);
    }

    const ClusteringResult clusters = cluster_matrix(matrix, cfg.propagation.sensitivity, cfg.clustering);
    const ClassificationMetrics metrics = classification_metrics(clusters, sc);
    out.pfa = metrics.pfa;
    out.pd = metrics.pd;
    out.clusters_found = clusters.k;
    out.ascent_violations = clusters.ascent_violations;
    out.mean_shift_runs = clusters.mean_shift_runs;

    if (cfg.sweep.run_topology || cfg.sweep.run_oracle) {
      std::vector<double> demands;
      for (const auto& ue : sc.ues) demands.push_back(ue.demand);
      const auto aps = ap_specs(sc.aps);
      const TopologyPlan greedy =
          greedy_optimize(matrix, demands, clusters, cfg.qos, aps, {cfg.topology.priority, cfg.topology.trim_power});
      if (greedy.feasible) out.off_greedy = greedy.off_count;
      if (cfg.sweep.run_oracle && static_cast<int>(aps.size()) <= cfg.topology.oracle_max_aps) {
        const TopologyPlan oracle =
            exhaustive_oracle(matrix, demands, cfg.qos, aps, cfg.topology.oracle_max_aps, Exec::Serial);
        if (oracle.feasible) out.off_oracle = oracle.off_count;
      }
    }
  } catch (const Error& e) {
    throw Error(e.kind(), "trial " + std::to_string(trial_index) + ": " + e.what());
  }
  return out;
}

RunConfig config_for_value(const RunConfig& base, double value) {
  nlohmann::json tree = base.tree;
  const auto path = sweep_parameter_path(base.sweep.varying);
  if (!path) throw Error(ErrorKind::Config, "sweep.varying: unknown parameter '" + base.sweep.varying + "'");
  set_path(tree, *path, value);
  return parse_config(tree);
}

void summarize(const std::vector<std::optional<double>>& xs, std::optional<double>& mean,
               std::optional<double>& stderr_out, int& undefined) {
  double sum = 0.0;
  std::size_t k = 0;
  undefined = 0;
  for (const auto& x : xs) {
    if (!x) {
      ++undefined;
      continue;
    }
    sum += *x;
    ++k;
  }
  mean.reset();
  stderr_out.reset();
  if (k == 0) return;
  const double m = sum / static_cast<double>(k);
  mean = m;
  if (k < 2) return;
  double ss = 0.0;
  for (const auto& x : xs)
    if (x) ss += (*x - m) * (*x - m);
  stderr_out = std::sqrt(ss / static_cast<double>(k - 1)) / std::sqrt(static_cast<double>(k));
}

EvalReport run_sweep(const RunConfig& cfg, int jobs) {
  const SweepSpec& spec = cfg.sweep;
  EvalReport report;
  report.varying = spec.varying;
  report.base_seed = spec.base_seed;
  report.config_hash = cfg.hash_hex();

  std::vector<RunConfig> per_value;
  per_value.reserve(spec.values.size());
  for (double v : spec.values) per_value.push_back(config_for_value(cfg, v));

  const std::size_t trials = static_cast<std::size_t>(spec.trials);
  const std::size_t total = spec.values.size() * trials;
  std::vector<std::optional<TrialOutcome>> outcomes(total);
  std::vector<std::string> errors(total);

  const auto count = static_cast<std::ptrdiff_t>(total);
#pragma omp parallel for schedule(dynamic) num_threads(jobs > 0 ? jobs : omp_get_max_threads())
  for (std::ptrdiff_t flat = 0; flat < count; ++flat) {
    const auto idx = static_cast<std::size_t>(flat);
    const std::size_t vi = idx / trials;
    const int t = static_cast<int>(idx % trials);
    try {
      TrialOutcome o = run_trial(per_value[vi], t, spec.base_seed, vi);
      o.value = spec.values[vi];
      outcomes[idx] = std::move(o);
    } catch (const std::exception& e) {
      errors[idx] = e.what();
    }
  }

  for (std::size_t idx = 0; idx < total; ++idx) {
    if (!errors[idx].empty() && report.complete) {
      report.complete = false;
      report.error = "value " + format_number(spec.values[idx / trials]) + ", " + errors[idx];
    }
    if (outcomes[idx]) {
      report.ascent_violations += outcomes[idx]->ascent_violations;
      report.mean_shift_runs += outcomes[idx]->mean_shift_runs;
      report.trials.push_back(*outcomes[idx]);
    }
  }

  for (std::size_t vi = 0; vi < spec.values.size(); ++vi) {
    ReportRow row;
    row.value = spec.values[vi];
    std::vector<std::optional<double>> pfa, pd, off_g, off_o;
    bool any_oracle = false, any_greedy = false;
    for (const auto& o : report.trials) {
      if (o.value_index != vi) continue;
      ++row.trials;
      pfa.push_back(o.pfa);
      pd.push_back(o.pd);
      if (o.off_greedy) any_greedy = true;
      if (o.off_oracle) any_oracle = true;
      off_g.push_back(o.off_greedy ? std::optional<double>(*o.off_greedy) : std::nullopt);
      off_o.push_back(o.off_oracle ? std::optional<double>(*o.off_oracle) : std::nullopt);
    }
    summarize(pfa, row.pfa_mean, row.pfa_stderr, row.pfa_undefined);
    summarize(pd, row.pd_mean, row.pd_stderr, row.pd_undefined);
    std::optional<double> unused;
    int unused_count = 0;
    if (any_greedy) summarize(off_g, row.off_greedy_mean, unused, unused_count);
    if (any_oracle) summarize(off_o, row.off_oracle_mean, unused, unused_count);
    report.rows.push_back(row);
  }
  return report;
}

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, p) : std::string("NA");
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }
std::string opt(const std::optional<int>& v) { return v ? std::to_string(*v) : "NA"; }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + p.string() + "'");
  return out;
}

}  // namespace

void write_report(const std::filesystem::path& dir, const EvalReport& report, const RunConfig& config) {
  {
    auto out = open_out(dir / "report.csv");
    out << report.varying
        << ",trials,pfa_mean,pfa_stderr,pfa_undefined,pd_mean,pd_stderr,pd_undefined,off_greedy_mean,off_oracle_mean\n";
    for (const auto& r : report.rows) {
      out << format_number(r.value) << ',' << r.trials << ',' << opt(r.pfa_mean) << ',' << opt(r.pfa_stderr) << ','
          << r.pfa_undefined << ',' << opt(r.pd_mean) << ',' << opt(r.pd_stderr) << ',' << r.pd_undefined << ','
          << opt(r.off_greedy_mean) << ',' << opt(r.off_oracle_mean) << '\n';
    }
  }
  {
    auto out = open_out(dir / "trials.csv");
    out << "value_index,value,trial,seed,n_ue,true_clutter,true_cluster,clusters_found,pfa,pd,"
           "ascent_violations,off_greedy,off_oracle\n";
    for (const auto& t : report.trials) {
      out << t.value_index << ',' << format_number(t.value) << ',' << t.trial << ',' << t.seed << ',' << t.ue_count
          << ',' << t.true_clutter << ',' << t.true_cluster << ',' << t.clusters_found << ',' << opt(t.pfa) << ','
          << opt(t.pd) << ',' << t.ascent_violations << ',' << opt(t.off_greedy) << ',' << opt(t.off_oracle) << '\n';
    }
  }
  {
    nlohmann::json meta;
    meta["base_seed"] = report.base_seed;
    meta["config_hash"] = report.config_hash;
    meta["complete"] = report.complete;
    if (!report.complete) meta["error"] = report.error;
    meta["varying"] = report.varying;
    meta["trials_completed"] = report.trials.size();
    meta["mean_shift_runs"] = report.mean_shift_runs;
    meta["ascent_violations"] = report.ascent_violations;
    meta["config"] = config.tree;
    auto out = open_out(dir / "report.meta");
    out << meta.dump(2) << '\n';
  }
}

}  // namespace ecoap
