#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecoap/clustering.hpp"
#include "ecoap/radio_env.hpp"
#include "ecoap/rss_matrix.hpp"
#include "ecoap/topology.hpp"

namespace ecoap {

/// Provenance stamped into every output file.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

// Scenario replay file (JSON).
nlohmann::json scenario_to_json(const GroundTruthScenario& sc, const Provenance& prov);
GroundTruthScenario scenario_from_json(const nlohmann::json& j);

/// Sidecar next to rss.csv: reference powers, sensitivity and the per-AP
/// levels/watts the optimizer needs.
struct RssSidecar {
  std::vector<int> ap_ids;
  std::vector<double> ref_power;
  double sensitivity = -90.0;
  std::vector<ApSpec> aps;
  Provenance provenance;
};

nlohmann::json sidecar_to_json(const RssSidecar& s);
RssSidecar sidecar_from_json(const nlohmann::json& j);
std::filesystem::path sidecar_path(const std::filesystem::path& rss_csv);

/// labels.csv: ue_id,label,density,converged (label 0 = clutter).
void write_labels_csv(std::ostream& out, const ClusteringResult& r);
/// Reads labels back into a result carrying only ue_ids/labels/density/converged.
ClusteringResult read_labels_csv(std::istream& in);
nlohmann::json cluster_summary_json(const ClusteringResult& r, const Provenance& prov);

/// demands.csv: ue_id,mbps. Returns demands aligned with `ue_ids`; UEs absent
/// from the file, or ids unknown to `ue_ids`, raise Error{Consistency}.
std::vector<double> read_demands_csv(std::istream& in, const std::vector<int>& ue_ids);

nlohmann::json plan_to_json(const TopologyPlan& plan);
/// assignment.csv: ue_id,ap_id (UNSERVED when uncovered).
void write_assignment_csv(std::ostream& out, const TopologyPlan& plan);

// File helpers raising Error{Io}.
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);
nlohmann::json read_json_file(const std::filesystem::path& p);

}  // namespace ecoap
