#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecoap/clustering.hpp"
#include "ecoap/ingest.hpp"
#include "ecoap/radio_env.hpp"
#include "ecoap/topology.hpp"

namespace ecoap {

struct SamplingConfig {
  std::size_t samples_per_link = 20;
  double window = 1.0;  // seconds
  SampleNoise noise;
};

struct TopologyConfig {
  PriorityRule priority = PriorityRule::ClusterAware;
  bool trim_power = true;
  int oracle_max_aps = kOracleMaxAps;
};

/// Parameter sweep: `trials` seeded pipeline runs per value of `varying`.
struct SweepSpec {
  std::string varying = "clutter_density";
  std::vector<double> values{0.005, 0.01, 0.02, 0.04};
  int trials = 100;
  std::uint64_t base_seed = 1;
  bool run_topology = false;
  bool run_oracle = false;
};

/// Names accepted by SweepSpec::varying and the config path each one sets.
std::optional<std::string> sweep_parameter_path(const std::string& varying);

/// Fully validated parameter set. `tree` is the effective JSON (defaults
/// merged with user values) and is what the config hash covers.
struct RunConfig {
  ScenarioConfig scenario;
  PropagationModel propagation;
  SamplingConfig sampling;
  IngestConfig ingest;
  ClusteringConfig clustering;
  QosModel qos;
  TopologyConfig topology;
  SweepSpec sweep;
  nlohmann::json tree;

  std::uint64_t hash() const;
  std::string hash_hex() const;
};

nlohmann::json default_config_tree();

/// Merges `user` over the defaults and validates. Unknown keys, wrong types
/// and out-of-range values throw Error{Config} naming the dotted path.
RunConfig parse_config(const nlohmann::json& user);

/// Sets a dotted path in a JSON tree, creating objects as needed.
void set_path(nlohmann::json& tree, const std::string& dotted, nlohmann::json value);

/// Reads `path` (if given), then applies `overrides` of the form
/// `a.b.c=<json or bare string>`. A missing file is a config error.
RunConfig load_config(const std::optional<std::filesystem::path>& path, std::span<const std::string> overrides = {});

}  // namespace ecoap
