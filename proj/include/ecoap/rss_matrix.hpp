#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace ecoap {

/// Marker for a link whose signal stayed below the detection floor.
inline constexpr double kNotDetected = std::numeric_limits<double>::quiet_NaN();

inline bool is_detected(double dbm) noexcept { return !std::isnan(dbm); }

inline constexpr double kMinRssDbm = -120.0;
inline constexpr double kMaxRssDbm = 30.0;

/// n_UE x n_AP matrix of dBm values, row-major; one row per UE, one column per AP.
struct RssMatrix {
  std::vector<int> ue_ids;
  std::vector<int> ap_ids;
  std::vector<double> ref_power;  // per-AP dBm at which the values were measured
  std::vector<double> values;

  RssMatrix() = default;
  RssMatrix(std::vector<int> ues, std::vector<int> aps, std::vector<double> ref);

  std::size_t ue_count() const noexcept { return ue_ids.size(); }
  std::size_t ap_count() const noexcept { return ap_ids.size(); }

  double& at(std::size_t ue, std::size_t ap) { return values[ue * ap_count() + ap]; }
  double at(std::size_t ue, std::size_t ap) const { return values[ue * ap_count() + ap]; }

  std::span<const double> row(std::size_t ue) const {
    return {values.data() + ue * ap_count(), ap_count()};
  }

  /// Throws Error{Input} when shapes disagree, ids repeat, or a detected
  /// entry lies outside [-120, 30] dBm.
  void validate() const;
};

bool operator==(const RssMatrix& a, const RssMatrix& b);

/// CSV layout: `ue_id,<ap id>,<ap id>,...` header, then one row per UE with
/// one-decimal dBm cells and `NA` for undetected links.
void write_rss_csv(std::ostream& out, const RssMatrix& m);
/// Parses the CSV layout above. `ref_power` is left at 0 dBm; the sidecar
/// supplies it. Throws Error{Parse} naming the offending line.
RssMatrix read_rss_csv(std::istream& in);

std::string format_dbm(double dbm);

}  // namespace ecoap
