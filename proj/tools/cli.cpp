#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ecoap/config.hpp"
#include "ecoap/error.hpp"
#include "ecoap/harness.hpp"
#include "ecoap/ingest.hpp"
#include "ecoap/io.hpp"

namespace ecoap::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out_dir = ".";
  int jobs = 1;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kIoError;
    case ErrorKind::Config:
    case ErrorKind::Infeasible:
    case ErrorKind::Placement: return kConfigError;
    case ErrorKind::Parse: return kParseError;
    case ErrorKind::Consistency: return kConsistencyError;
    default: return kFailure;
  }
}

RunConfig load(const Common& c) {
  std::optional<fs::path> path;
  if (!c.config.empty()) path = c.config;
  return load_config(path, c.overrides);
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create output directory '" + dir + "'");
  return dir;
}

RssMatrix read_matrix(const fs::path& p) {
  std::istringstream in(read_file(p));
  try {
    return read_rss_csv(in);
  } catch (const Error& e) {
    throw Error(e.kind(), p.string() + ": " + e.what());
  }
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream ss;
  fn(ss);
  return ss.str();
}

int cmd_simulate(const Common& c, std::uint64_t seed, std::ostream& out) {
  const RunConfig cfg = load(c);
  const fs::path dir = prepare_out(c.out_dir);
  const Provenance prov{cfg.hash_hex(), seed};

  const GroundTruthScenario sc = sample_scenario(cfg.scenario, seed);
  RssMatrix matrix;
  if (sc.ues.empty()) {
    for (const auto& ap : sc.aps) {
      matrix.ap_ids.push_back(ap.id);
      matrix.ref_power.push_back(ap.tx_power);
    }
  } else {
    const auto samples =
        generate_samples(sc, cfg.propagation, cfg.sampling.samples_per_link, seed, cfg.sampling.noise);
    matrix = aggregate(samples, cfg.ingest);
  }

  RssSidecar side;
  side.ap_ids = matrix.ap_ids;
  side.ref_power = matrix.ref_power;
  side.sensitivity = cfg.propagation.sensitivity;
  side.aps = ap_specs(sc.aps);
  side.provenance = prov;

  write_file(dir / "scenario.json", scenario_to_json(sc, prov).dump(2) + "\n");
  write_file(dir / "rss.csv", render([&](std::ostream& o) { write_rss_csv(o, matrix); }));
  write_file(dir / "rss.json", sidecar_to_json(side).dump(2) + "\n");
  out << "simulate: " << sc.ues.size() << " UEs, " << sc.aps.size() << " APs, " << sc.zones.size()
      << " cluster zones -> " << dir.string() << "\n";
  return kOk;
}

int cmd_cluster(const Common& c, const std::string& rss_path, std::ostream& out) {
  RunConfig cfg = load(c);
  cfg.clustering.threads = c.jobs;
  const RssMatrix matrix = read_matrix(rss_path);
  double sensitivity = cfg.propagation.sensitivity;
  Provenance prov{cfg.hash_hex(), 0};
  if (const fs::path side = sidecar_path(rss_path); fs::exists(side)) {
    const RssSidecar s = sidecar_from_json(read_json_file(side));
    sensitivity = s.sensitivity;
    prov.seed = s.provenance.seed;
  }
  const fs::path dir = prepare_out(c.out_dir);
  const ClusteringResult res = cluster_matrix(matrix, sensitivity, cfg.clustering);
  write_file(dir / "labels.csv", render([&](std::ostream& o) { write_labels_csv(o, res); }));
  write_file(dir / "cluster_summary.json", cluster_summary_json(res, prov).dump(2) + "\n");
  const auto clutter = std::count(res.labels.begin(), res.labels.end(), kClutter);
  out << "cluster: " << matrix.ue_count() << " UEs, K=" << res.k << ", clutter=" << clutter
      << (res.degenerate ? " (degenerate bandwidth, all clutter)" : "") << "\n";
  return kOk;
}

int cmd_optimize(const Common& c, const std::string& rss_path, const std::string& labels_path,
                 const std::string& demands_path, bool oracle, std::ostream& out) {
  const RunConfig cfg = load(c);
  RssMatrix matrix = read_matrix(rss_path);
  const RssSidecar side = sidecar_from_json(read_json_file(sidecar_path(rss_path)));
  if (side.ap_ids != matrix.ap_ids)
    throw Error(ErrorKind::Consistency, "sidecar AP ids differ from the rss.csv header");
  matrix.ref_power = side.ref_power;

  ClusteringResult labels;
  {
    std::istringstream in(read_file(labels_path));
    labels = read_labels_csv(in);
  }
  {
    auto a = labels.ue_ids, b = matrix.ue_ids;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw Error(ErrorKind::Consistency, "labels.csv and rss.csv cover different UE ids");
    // Reorder labels to the matrix row order.
    ClusteringResult aligned = labels;
    for (std::size_t u = 0; u < matrix.ue_count(); ++u) {
      const auto it = std::find(labels.ue_ids.begin(), labels.ue_ids.end(), matrix.ue_ids[u]);
      const auto i = static_cast<std::size_t>(it - labels.ue_ids.begin());
      aligned.ue_ids[u] = labels.ue_ids[i];
      aligned.labels[u] = labels.labels[i];
      aligned.density[u] = labels.density[i];
      aligned.converged[u] = labels.converged[i];
    }
    labels = std::move(aligned);
  }

  std::vector<double> demands(matrix.ue_count(), cfg.scenario.demand);
  if (!demands_path.empty()) {
    std::istringstream in(read_file(demands_path));
    demands = read_demands_csv(in, matrix.ue_ids);
  }

  QosModel qos = cfg.qos;
  qos.sensitivity = side.sensitivity;
  const TopologyPlan baseline = baseline_plan(matrix, demands, qos, side.aps);
  const TopologyPlan plan =
      greedy_optimize(matrix, demands, labels, qos, side.aps, {cfg.topology.priority, cfg.topology.trim_power});

  nlohmann::json doc;
  doc["provenance"] = {{"config_hash", cfg.hash_hex()}, {"seed", side.provenance.seed}};
  doc["plan"] = plan_to_json(plan);
  doc["baseline_watts"] = baseline.total_watts;
  const EnergyReport energy = energy_report(plan, baseline);
  doc["energy"] = {{"watts_saved", energy.watts_saved},
                   {"fraction_saved", energy.fraction_saved ? nlohmann::json(*energy.fraction_saved) : nlohmann::json("UNDEFINED")}};
  if (oracle) {
    if (static_cast<int>(matrix.ap_count()) > cfg.topology.oracle_max_aps) {
      doc["oracle"] = {{"skipped", "AP count exceeds topology.oracle_max_aps"}};
    } else {
      const TopologyPlan best =
          exhaustive_oracle(matrix, demands, qos, side.aps, cfg.topology.oracle_max_aps, Exec::Parallel, c.jobs);
      doc["oracle"] = {{"plan", plan_to_json(best)}, {"gap", best.off_count - plan.off_count}};
    }
  }

  const fs::path dir = prepare_out(c.out_dir);
  write_file(dir / "plan.json", doc.dump(2) + "\n");
  write_file(dir / "assignment.csv", render([&](std::ostream& o) { write_assignment_csv(o, plan); }));
  if (!plan.feasible) {
    out << "optimize: all-on configuration is infeasible (" << plan.violations.size() << " violations)\n";
  } else {
    out << "optimize: " << plan.off_count << " of " << matrix.ap_count() << " APs off, " << plan.total_watts
        << " W (saved " << energy.watts_saved << " W)";
    if (doc.contains("oracle") && doc["oracle"].contains("gap")) out << ", oracle gap " << doc["oracle"]["gap"];
    out << "\n";
  }
  return kOk;
}

int cmd_evaluate(const Common& c, std::optional<std::uint64_t> seed, std::ostream& out, std::ostream& err) {
  std::vector<std::string> overrides = c.overrides;
  if (seed) overrides.push_back("sweep.base_seed=" + std::to_string(*seed));
  std::optional<fs::path> path;
  if (!c.config.empty()) path = c.config;
  const RunConfig cfg = load_config(path, overrides);

  const fs::path dir = prepare_out(c.out_dir);
  const fs::path marker = dir / "report.incomplete";
  write_file(marker, "sweep in progress or aborted\n");
  const EvalReport report = run_sweep(cfg, c.jobs);
  write_report(dir, report, cfg);
  if (!report.complete) {
    err << "evaluate: aborted: " << report.error << "\n";
    return kFailure;
  }
  fs::remove(marker);
  out << "evaluate: " << report.rows.size() << " rows x " << cfg.sweep.trials << " trials -> " << dir.string()
      << "\n";
  for (const auto& r : report.rows) {
    out << "  " << report.varying << "=" << format_number(r.value)
        << "  PFA=" << (r.pfa_mean ? format_number(*r.pfa_mean) : "NA")
        << "  PD=" << (r.pd_mean ? format_number(*r.pd_mean) : "NA") << "\n";
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-aware AP planning and RSS-based clutter/cluster detection", "ecoap"};
  app.require_subcommand(1);

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON config file (defaults used when omitted)");
    sub->add_option("--set", common.overrides, "Override a config value: key.path=value");
    sub->add_option("--out", common.out_dir, "Output directory");
  };

  std::uint64_t sim_seed = 1;
  auto* simulate = app.add_subcommand("simulate", "Synthesize a scenario and its aggregated RSS matrix");
  add_common(simulate);
  simulate->add_option("--seed", sim_seed, "Scenario seed");

  std::string rss_path, labels_path, demands_path;
  auto* cluster = app.add_subcommand("cluster", "Detect clutter and clusters in an RSS matrix");
  add_common(cluster);
  cluster->add_option("--rss", rss_path, "rss.csv")->required();
  cluster->add_option("--jobs", common.jobs, "Worker threads");

  bool oracle = false;
  auto* optimize = app.add_subcommand("optimize", "Plan which APs to switch off");
  add_common(optimize);
  optimize->add_option("--rss", rss_path, "rss.csv (sidecar rss.json must sit next to it)")->required();
  optimize->add_option("--labels", labels_path, "labels.csv from the cluster step")->required();
  optimize->add_option("--demands", demands_path, "demands.csv (ue_id,mbps)");
  optimize->add_flag("--oracle", oracle, "Also run the exhaustive oracle and report the gap");
  optimize->add_option("--jobs", common.jobs, "Worker threads for the oracle");

  std::optional<std::uint64_t> eval_seed;
  auto* evaluate = app.add_subcommand("evaluate", "Monte-Carlo PFA/PD sweep");
  add_common(evaluate);
  evaluate->add_option("--jobs", common.jobs, "Worker threads (does not change outputs)");
  evaluate->add_option("--seed", eval_seed, "Base seed (overrides sweep.base_seed)");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (common.jobs < 1) throw Error(ErrorKind::Config, "--jobs must be >= 1");
    if (simulate->parsed()) return cmd_simulate(common, sim_seed, out);
    if (cluster->parsed()) return cmd_cluster(common, rss_path, out);
    if (optimize->parsed()) return cmd_optimize(common, rss_path, labels_path, demands_path, oracle, out);
    if (evaluate->parsed()) return cmd_evaluate(common, eval_seed, out, err);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace ecoap::cli
