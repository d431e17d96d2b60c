#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ecoap/rss_matrix.hpp"

namespace ecoap {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Label value for devices that belong to no cluster.
inline constexpr int kClutter = 0;

struct ApNode {
  int id = 0;
  Vec2 position;
  double tx_power = 20.0;
  std::vector<double> power_levels{5.0, 10.0, 15.0, 20.0};  // strictly increasing dBm
  double watts_on = 10.0;
  double watts_standby = 1.0;

  double min_power() const { return power_levels.front(); }
  double max_power() const { return power_levels.back(); }
  void validate() const;
};

struct UeDevice {
  int id = 0;
  Vec2 position;
  double demand = 2.0;  // Mbps
};

struct ClusterZone {
  Vec2 center;
  double radius = 0.0;
};

/// Deployment plus the planted truth used for scoring.
struct GroundTruthScenario {
  Vec2 area;  // width, height in meters
  double grid_spacing = 1.0;
  std::vector<ApNode> aps;
  std::vector<UeDevice> ues;
  std::vector<int> true_label;  // kClutter or 1..K, parallel to `ues`
  std::vector<ClusterZone> zones;
  std::uint64_t seed = 0;

  /// Checks label/geometry consistency; throws Error{Input} on violation.
  void validate() const;
};

/// Log-distance path loss with exponentially correlated log-normal shadowing.
struct PropagationModel {
  double pl0 = 40.0;            // dB at d0
  double d0 = 1.0;              // m
  double exponent = 3.0;
  double shadow_sigma = 6.0;    // dB
  double corr_distance = 5.0;   // m
  double sensitivity = -90.0;   // dBm

  static PropagationModel indoor() { return {}; }
  static PropagationModel outdoor() {
    PropagationModel m;
    m.exponent = 3.5;
    m.corr_distance = 50.0;
    return m;
  }
  void validate() const;
};

/// Per-sample impairments on top of path loss and shadowing.
struct SampleNoise {
  double meas_sigma = 2.0;     // dB, iid per sample
  double outlier_prob = 0.05;
  double outlier_min = 10.0;   // dB, magnitude range of the +/- offset
  double outlier_max = 30.0;
};

/// Raw per-link measurement streams. Undetected samples hold kNotDetected.
struct RssSampleSet {
  std::size_t ue_count = 0;
  std::size_t ap_count = 0;
  std::size_t per_link = 0;
  double window = 1.0;  // seconds
  std::vector<int> ue_ids;
  std::vector<int> ap_ids;
  std::vector<double> ref_power;
  std::vector<double> samples;  // [(ue * ap_count + ap) * per_link + s]

  std::span<const double> link(std::size_t ue, std::size_t ap) const {
    return {samples.data() + (ue * ap_count + ap) * per_link, per_link};
  }
};

struct ApDefaults {
  std::vector<double> power_levels{5.0, 10.0, 15.0, 20.0};
  double watts_on = 10.0;
  double watts_standby = 1.0;
};

struct ScenarioConfig {
  Vec2 area{50.0, 30.0};
  double grid_spacing = 1.0;
  int n_clusters = 2;
  double cluster_radius = 5.0;
  double cluster_density = 0.2;   // UE / m^2 inside a zone
  double clutter_density = 0.02;  // UE / m^2 outside all zones
  int ap_count = 11;
  double demand = 2.0;            // Mbps per UE
  int max_placement_attempts = 1000;
  ApDefaults ap;
};

/// APs on a jittered lattice covering `area`; deterministic in `seed`.
std::vector<ApNode> place_aps(int count, Vec2 area, std::uint64_t seed,
                              const ApDefaults& defaults = {});

/// Cell-centered measurement grid, row-major in y then x.
std::vector<Vec2> grid_points(Vec2 area, double spacing);

/// Plants disc-shaped cluster zones and draws clustered and clutter UEs from
/// the grid without replacement.
GroundTruthScenario sample_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// pl0 + 10 * exponent * log10(d / d0), with d clamped below at d0.
double path_loss(double distance_m, const PropagationModel& model);

inline constexpr std::size_t kMaxShadowingPositions = 2000;

/// Zero-mean Gaussian fields with covariance sigma^2 exp(-|pi - pj| / corr_distance),
/// one column per field. Coincident positions share one value.
Eigen::MatrixXd shadowing_field(std::span<const Vec2> positions, const PropagationModel& model,
                                std::size_t field_count, std::uint64_t seed,
                                std::size_t max_positions = kMaxShadowingPositions);

/// RSS = tx_power - path_loss + shadowing (frozen per link) + measurement
/// noise + occasional outlier offsets. Values under the sensitivity floor are
/// stored as kNotDetected.
RssSampleSet generate_samples(const GroundTruthScenario& scenario, const PropagationModel& model,
                              std::size_t samples_per_link, std::uint64_t seed,
                              const SampleNoise& noise = {});

}  // namespace ecoap
