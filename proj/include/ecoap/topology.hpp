#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ecoap/clustering.hpp"
#include "ecoap/radio_env.hpp"
#include "ecoap/rss_matrix.hpp"

namespace ecoap {

inline constexpr int kUnserved = -1;

struct RateStep {
  double min_rss;  // dBm, inclusive
  double rate;     // Mbps
};

/// Step rate table plus a per-AP airtime budget.
struct QosModel {
  // 802.11g OFDM rates against typical receiver sensitivities.
  std::vector<RateStep> rate_table{{-65, 54}, {-68, 48}, {-72, 36}, {-76, 24},
                                   {-80, 18}, {-84, 12}, {-87, 9},  {-90, 6}};
  double sensitivity = -90.0;
  double airtime_cap = 1.0;

  void validate() const;
};

/// Largest rate whose threshold is <= rss; 0 when undetected or below the table.
double rate_from_rss(double rss, const QosModel& qos);

/// Per-AP data the optimizer needs beyond the RSS matrix.
struct ApSpec {
  std::vector<double> power_levels;
  double watts_on = 10.0;
  double watts_standby = 1.0;

  double max_power() const { return power_levels.back(); }
  double min_power() const { return power_levels.front(); }
};

std::vector<ApSpec> ap_specs(std::span<const ApNode> aps);

/// Strongest detected active AP per UE (column index), ties to the smaller
/// AP id; kUnserved when no active AP is detected.
std::vector<int> assign_ues(const RssMatrix& matrix, const std::vector<bool>& active);

struct Candidate {
  std::vector<bool> active;
  std::vector<double> power;  // dBm per AP; ignored for inactive ones
};

struct Violation {
  enum class Kind { Uncovered, Overloaded };
  Kind kind;
  std::size_t index;    // UE row for Uncovered, AP column for Overloaded
  double airtime = 0.0;
};

struct Feasibility {
  bool feasible = false;
  std::vector<Violation> violations;
  std::vector<int> assignment;
  std::vector<double> airtime;  // per AP
};

/// Coverage: every UE hears an active AP. QoS: every active AP satisfies
/// sum(demand / rate) <= airtime_cap over its assigned UEs.
Feasibility check_feasibility(const RssMatrix& matrix, const Candidate& candidate, std::span<const double> demands,
                              const QosModel& qos, std::span<const ApSpec> aps);

enum class PriorityRule {
  ClusterAware,  // fewest cluster members first, then lightest load
  LoadOnly,      // lightest load first
};

/// Active AP columns in switch-off order. `matrix` must already reflect the
/// current powers. Ties fall to the smaller AP id.
std::vector<std::size_t> switch_off_priority(const RssMatrix& matrix, const ClusteringResult& clusters,
                                             const std::vector<bool>& active,
                                             PriorityRule rule = PriorityRule::ClusterAware);

struct TopologyPlan {
  std::vector<int> ap_ids;
  std::vector<int> ue_ids;
  std::vector<bool> active;
  std::vector<double> power;
  std::vector<int> assignment;  // AP column per UE, or kUnserved
  bool feasible = false;
  int off_count = 0;
  double total_watts = 0.0;
  std::vector<Violation> violations;
};

double total_watts(const std::vector<bool>& active, std::span<const ApSpec> aps);

/// All APs on at maximum power.
TopologyPlan baseline_plan(const RssMatrix& matrix, std::span<const double> demands, const QosModel& qos,
                           std::span<const ApSpec> aps);

struct GreedyOptions {
  PriorityRule priority = PriorityRule::ClusterAware;
  bool trim_power = true;
};

/// Greedy switch-off in priority order with power-raise repair, then a
/// round-robin power trim. `matrix` is measured at `matrix.ref_power`.
TopologyPlan greedy_optimize(const RssMatrix& matrix, std::span<const double> demands,
                             const ClusteringResult& clusters, const QosModel& qos, std::span<const ApSpec> aps,
                             const GreedyOptions& options = {});

enum class Exec { Serial, Parallel };

inline constexpr int kOracleMaxAps = 12;

/// Exhaustive search over on/off subsets and {min, max} power per active AP.
/// Best = most APs off, then fewest watts, then smallest (subset mask,
/// power mask) in enumeration order. Throws Error{Input} above `max_aps`.
TopologyPlan exhaustive_oracle(const RssMatrix& matrix, std::span<const double> demands, const QosModel& qos,
                               std::span<const ApSpec> aps, int max_aps = kOracleMaxAps, Exec exec = Exec::Parallel,
                               int threads = 0);

struct EnergyReport {
  double watts_saved = 0.0;
  std::optional<double> fraction_saved;  // watts_saved / baseline; nullopt when the baseline draws 0 W
};

EnergyReport energy_report(const TopologyPlan& plan, const TopologyPlan& baseline);

}  // namespace ecoap
