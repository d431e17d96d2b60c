#include "ecoap/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ecoap/error.hpp"
#include "ecoap/rng.hpp"

namespace ecoap {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorKind::Config, "config '" + path + "': " + msg);
}

void merge_checked(json& base, const json& user, const std::string& prefix) {
  if (!user.is_object()) fail(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) fail(path, "unknown key");
    json& slot = base[it.key()];
    const json& v = it.value();
    if (slot.is_object()) {
      merge_checked(slot, v, path);
    } else if (slot.is_number()) {
      if (!v.is_number()) fail(path, "expected a number");
      slot = v;
    } else if (slot.is_boolean()) {
      if (!v.is_boolean()) fail(path, "expected true/false");
      slot = v;
    } else if (slot.is_string()) {
      if (!v.is_string()) fail(path, "expected a string");
      slot = v;
    } else if (slot.is_array()) {
      if (!v.is_array()) fail(path, "expected an array");
      slot = v;
    }
  }
}

struct Reader {
  const json& root;

  const json& at(const std::string& dotted) const {
    const json* node = &root;
    std::size_t start = 0;
    while (start <= dotted.size()) {
      const auto dot = dotted.find('.', start);
      node = &node->at(dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start));
      if (dot == std::string::npos) break;
      start = dot + 1;
    }
    return *node;
  }

  double num(const std::string& p) const {
    const double v = at(p).get<double>();
    if (!std::isfinite(v)) fail(p, "must be finite");
    return v;
  }
  double num(const std::string& p, double lo, double hi) const {
    const double v = num(p);
    if (v < lo || v > hi) fail(p, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }
  double positive(const std::string& p) const {
    const double v = num(p);
    if (!(v > 0.0)) fail(p, "must be > 0");
    return v;
  }
  long long integer(const std::string& p, long long lo, long long hi) const {
    const json& j = at(p);
    const double d = j.get<double>();
    if (std::floor(d) != d) fail(p, "must be an integer");
    const auto v = static_cast<long long>(d);
    if (v < lo || v > hi) fail(p, "value " + std::to_string(v) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }
  std::string str(const std::string& p) const { return at(p).get<std::string>(); }
  bool flag(const std::string& p) const { return at(p).get<bool>(); }
  std::vector<double> numbers(const std::string& p) const {
    std::vector<double> out;
    for (const auto& e : at(p)) {
      if (!e.is_number()) fail(p, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
};

}  // namespace

std::optional<std::string> sweep_parameter_path(const std::string& varying) {
  if (varying == "clutter_density") return "scenario.clutter_density";
  if (varying == "cluster_density") return "scenario.cluster_density";
  if (varying == "cluster_count") return "scenario.n_clusters";
  if (varying == "ap_count") return "scenario.ap_count";
  if (varying == "cluster_radius") return "scenario.cluster_radius";
  return std::nullopt;
}

json default_config_tree() {
  return json::parse(R"({
    "scenario": {
      "area": [50.0, 30.0],
      "grid_spacing": 1.0,
      "n_clusters": 2,
      "cluster_radius": 5.0,
      "cluster_density": 0.2,
      "clutter_density": 0.02,
      "ap_count": 11,
      "demand_mbps": 2.0,
      "max_placement_attempts": 1000
    },
    "aps": {
      "power_levels": [5.0, 10.0, 15.0, 20.0],
      "watts_on": 10.0,
      "watts_standby": 1.0
    },
    "propagation": {
      "profile": "indoor",
      "pl0": 40.0,
      "d0": 1.0,
      "exponent": 3.0,
      "shadow_sigma": 6.0,
      "corr_distance": 5.0,
      "sensitivity": -90.0
    },
    "sampling": {
      "samples_per_link": 20,
      "window": 1.0,
      "meas_sigma": 2.0,
      "outlier_prob": 0.05,
      "outlier_min": 10.0,
      "outlier_max": 30.0
    },
    "ingest": {
      "max_outlier_fraction": 0.2,
      "mean_domain": "db"
    },
    "clustering": {
      "threshold_rule": "geometric_mean",
      "threshold_param": 0.5,
      "extraction": "mean_shift",
      "tol_factor": 0.001,
      "max_iter": 500,
      "mode_merge_factor": 0.5,
      "impute_offset": 5.0,
      "bandwidth_scale": 1.5
    },
    "qos": {
      "rate_table": [[-65, 54], [-68, 48], [-72, 36], [-76, 24], [-80, 18], [-84, 12], [-87, 9], [-90, 6]],
      "airtime_cap": 1.0
    },
    "topology": {
      "priority": "cluster_aware",
      "trim_power": true,
      "oracle_max_aps": 12
    },
    "sweep": {
      "varying": "clutter_density",
      "values": [0.005, 0.01, 0.02, 0.04],
      "trials": 100,
      "base_seed": 1,
      "run_topology": false,
      "run_oracle": false
    }
  })");
}

std::uint64_t RunConfig::hash() const { return fnv1a64(tree.dump()); }

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

RunConfig parse_config(const json& user) {
  json tree = default_config_tree();
  if (user.is_null()) {
    // defaults only
  } else {
    if (!user.is_object()) fail("<root>", "expected an object");
    // The profile picks propagation defaults; explicit keys still win.
    if (user.contains("propagation") && user["propagation"].is_object() && user["propagation"].contains("profile")) {
      const json& prof = user["propagation"]["profile"];
      if (!prof.is_string()) fail("propagation.profile", "expected a string");
      if (prof == "outdoor") {
        tree["propagation"]["exponent"] = 3.5;
        tree["propagation"]["corr_distance"] = 50.0;
      } else if (prof != "indoor") {
        fail("propagation.profile", "expected 'indoor' or 'outdoor'");
      }
    }
    merge_checked(tree, user, "");
  }

  const Reader r{tree};
  RunConfig c;

  auto& s = c.scenario;
  const auto area = r.numbers("scenario.area");
  if (area.size() != 2 || !(area[0] > 0.0) || !(area[1] > 0.0)) fail("scenario.area", "expected [width, height] > 0");
  s.area = {area[0], area[1]};
  s.grid_spacing = r.positive("scenario.grid_spacing");
  s.n_clusters = static_cast<int>(r.integer("scenario.n_clusters", 0, 1000));
  s.cluster_radius = r.positive("scenario.cluster_radius");
  s.cluster_density = r.num("scenario.cluster_density", 0.0, 1e6);
  s.clutter_density = r.num("scenario.clutter_density", 0.0, 1e6);
  s.ap_count = static_cast<int>(r.integer("scenario.ap_count", 1, 4096));
  s.demand = r.num("scenario.demand_mbps", 0.0, 1e6);
  s.max_placement_attempts = static_cast<int>(r.integer("scenario.max_placement_attempts", 1, 10'000'000));

  s.ap.power_levels = r.numbers("aps.power_levels");
  if (s.ap.power_levels.empty()) fail("aps.power_levels", "must not be empty");
  for (std::size_t i = 1; i < s.ap.power_levels.size(); ++i)
    if (!(s.ap.power_levels[i] > s.ap.power_levels[i - 1])) fail("aps.power_levels", "must be strictly increasing");
  s.ap.watts_on = r.num("aps.watts_on", 0.0, 1e6);
  s.ap.watts_standby = r.num("aps.watts_standby", 0.0, 1e6);
  if (!(s.ap.watts_on > s.ap.watts_standby)) fail("aps.watts_on", "must exceed aps.watts_standby");

  auto& p = c.propagation;
  p.pl0 = r.num("propagation.pl0");
  p.d0 = r.positive("propagation.d0");
  p.exponent = r.positive("propagation.exponent");
  p.shadow_sigma = r.num("propagation.shadow_sigma", 0.0, 100.0);
  p.corr_distance = r.positive("propagation.corr_distance");
  p.sensitivity = r.num("propagation.sensitivity", kMinRssDbm, kMaxRssDbm);

  auto& smp = c.sampling;
  smp.samples_per_link = static_cast<std::size_t>(r.integer("sampling.samples_per_link", 1, 100000));
  smp.window = r.positive("sampling.window");
  smp.noise.meas_sigma = r.num("sampling.meas_sigma", 0.0, 100.0);
  smp.noise.outlier_prob = r.num("sampling.outlier_prob", 0.0, 1.0);
  smp.noise.outlier_min = r.num("sampling.outlier_min", 0.0, 200.0);
  smp.noise.outlier_max = r.num("sampling.outlier_max", 0.0, 200.0);
  if (smp.noise.outlier_max < smp.noise.outlier_min) fail("sampling.outlier_max", "must be >= sampling.outlier_min");

  c.ingest.max_outlier_fraction = r.num("ingest.max_outlier_fraction", 0.0, 0.5);
  const auto domain = r.str("ingest.mean_domain");
  if (domain == "db") c.ingest.mean_domain = MeanDomain::Db;
  else if (domain == "mw") c.ingest.mean_domain = MeanDomain::Mw;
  else fail("ingest.mean_domain", "expected 'db' or 'mw'");

  auto& cl = c.clustering;
  const auto rule = r.str("clustering.threshold_rule");
  if (rule == "mean") cl.threshold_rule = ThresholdRule::Mean;
  else if (rule == "geometric_mean") cl.threshold_rule = ThresholdRule::GeometricMean;
  else if (rule == "quantile") cl.threshold_rule = ThresholdRule::Quantile;
  else if (rule == "absolute") cl.threshold_rule = ThresholdRule::Absolute;
  else fail("clustering.threshold_rule", "expected 'mean', 'geometric_mean', 'quantile' or 'absolute'");
  cl.threshold_param = r.num("clustering.threshold_param");
  if (cl.threshold_rule == ThresholdRule::Quantile && (cl.threshold_param < 0.0 || cl.threshold_param > 1.0))
    fail("clustering.threshold_param", "quantile must lie in [0, 1]");
  const auto extraction = r.str("clustering.extraction");
  if (extraction == "mean_shift") cl.extraction = Extraction::MeanShift;
  else if (extraction == "connected_components") cl.extraction = Extraction::ConnectedComponents;
  else fail("clustering.extraction", "expected 'mean_shift' or 'connected_components'");
  cl.tol_factor = r.positive("clustering.tol_factor");
  cl.max_iter = static_cast<int>(r.integer("clustering.max_iter", 1, 1'000'000));
  cl.mode_merge_factor = r.positive("clustering.mode_merge_factor");
  cl.impute_offset = r.num("clustering.impute_offset", 0.0, 100.0);
  cl.bandwidth_scale = r.positive("clustering.bandwidth_scale");

  c.qos.rate_table.clear();
  for (const auto& step : r.at("qos.rate_table")) {
    if (!step.is_array() || step.size() != 2 || !step[0].is_number() || !step[1].is_number())
      fail("qos.rate_table", "expected [[min_rss_dbm, rate_mbps], ...]");
    c.qos.rate_table.push_back({step[0].get<double>(), step[1].get<double>()});
  }
  c.qos.airtime_cap = r.positive("qos.airtime_cap");
  c.qos.sensitivity = p.sensitivity;
  try {
    c.qos.validate();
  } catch (const Error& e) {
    fail("qos", e.what());
  }

  const auto prio = r.str("topology.priority");
  if (prio == "cluster_aware") c.topology.priority = PriorityRule::ClusterAware;
  else if (prio == "load_only") c.topology.priority = PriorityRule::LoadOnly;
  else fail("topology.priority", "expected 'cluster_aware' or 'load_only'");
  c.topology.trim_power = r.flag("topology.trim_power");
  c.topology.oracle_max_aps = static_cast<int>(r.integer("topology.oracle_max_aps", 1, 20));

  auto& sw = c.sweep;
  sw.varying = r.str("sweep.varying");
  if (!sweep_parameter_path(sw.varying))
    fail("sweep.varying", "expected one of clutter_density, cluster_density, cluster_count, ap_count, cluster_radius");
  sw.values = r.numbers("sweep.values");
  if (sw.values.empty()) fail("sweep.values", "must not be empty");
  sw.trials = static_cast<int>(r.integer("sweep.trials", 1, 10'000'000));
  {
    const json& seed = r.at("sweep.base_seed");
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() && seed.get<long long>() < 0))
      fail("sweep.base_seed", "must be a non-negative integer");
    sw.base_seed = seed.get<std::uint64_t>();
  }
  sw.run_topology = r.flag("sweep.run_topology");
  sw.run_oracle = r.flag("sweep.run_oracle");

  c.tree = std::move(tree);
  return c;
}

void set_path(json& tree, const std::string& dotted, json value) {
  json* node = &tree;
  std::size_t start = 0;
  for (;;) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) fail(dotted, "malformed path");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

RunConfig load_config(const std::optional<std::filesystem::path>& path, std::span<const std::string> overrides) {
  json user = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorKind::Config, "config file '" + path->string() + "' cannot be opened");
    try {
      user = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Config, "config file '" + path->string() + "': " + e.what());
    }
  }
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) fail(o, "override must be key.path=value");
    const std::string key = o.substr(0, eq);
    const std::string raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    set_path(user, key, std::move(value));
  }
  return parse_config(user);
}

}  // namespace ecoap
