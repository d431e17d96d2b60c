#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ecoap/kernels.hpp"
#include "ecoap/radio_env.hpp"
#include "ecoap/rss_matrix.hpp"

namespace ecoap {

enum class ThresholdRule { Mean, GeometricMean, Quantile, Absolute };
enum class Extraction { MeanShift, ConnectedComponents };

struct ClusteringConfig {
  ThresholdRule threshold_rule = ThresholdRule::GeometricMean;
  double threshold_param = 0.5;   // q for Quantile, c for Absolute
  Extraction extraction = Extraction::MeanShift;
  double tol_factor = 1e-3;       // mean-shift step tolerance, in units of h
  int max_iter = 500;
  double mode_merge_factor = 0.5; // modes closer than this many h are one cluster
  double impute_offset = 5.0;     // undetected links become sensitivity - offset
  double bandwidth_scale = 1.5;   // multiplies the rule-of-thumb bandwidth
  int threads = 1;                // <= 0: OpenMP default; 1: serial kernels
};

/// Isotropic Gaussian KDE. Immutable once built.
class KdeModel {
public:
  KdeModel(Points points, double bandwidth);

  const Points& points() const noexcept { return points_; }
  double bandwidth() const noexcept { return h_; }
  std::size_t size() const noexcept { return points_.n; }
  std::size_t dim() const noexcept { return points_.dim; }
  /// (2 pi)^(-M/2) h^(-M) / n
  double normalizer() const noexcept { return norm_; }

private:
  Points points_;
  double h_;
  double norm_;
};

/// h = s * (4 / ((M + 2) n))^(1 / (M + 4)), s = sqrt(mean per-dimension sample
/// variance). Throws Error{Degenerate} when n < 2 or every dimension is constant.
double select_bandwidth(const Points& points);

/// f(x) = (1/n) sum_i (2 pi)^(-M/2) h^(-M) exp(-|x - x_i|^2 / (2 h^2))
double kde_at(const KdeModel& model, std::span<const double> x);

/// Mode seeking; see kernels::mean_shift.
MeanShiftOutcome mean_shift(const KdeModel& model, std::span<const double> start, double tol, int max_iter);

struct ClusteringResult {
  std::vector<int> ue_ids;
  std::vector<int> labels;            // kClutter or 1..k
  int k = 0;
  std::vector<double> density;        // f at each point
  std::vector<bool> converged;
  double threshold = 0.0;
  double bandwidth = 0.0;
  std::vector<std::vector<double>> modes;  // modes[label - 1]
  bool degenerate = false;            // bandwidth fell back to 1 dB
  int ascent_violations = 0;
  int mean_shift_runs = 0;
};

/// Clutter detection then mode-seeking cluster extraction. `ue_ids` (one per
/// row, defaults to row indices) break ties when numbering clusters.
ClusteringResult cluster(const Points& points, std::span<const int> ue_ids, const ClusteringConfig& config = {});

/// RSS rows as points, undetected entries replaced by sensitivity - offset.
Points rss_points(const RssMatrix& matrix, double sensitivity, double impute_offset);

ClusteringResult cluster_matrix(const RssMatrix& matrix, double sensitivity, const ClusteringConfig& config = {});

struct ClassificationMetrics {
  std::optional<double> pfa;  // nullopt: no true clutter
  std::optional<double> pd;   // nullopt: no true cluster members
  std::size_t true_clutter = 0;
  std::size_t true_cluster = 0;
  std::size_t false_alarms = 0;
  std::size_t detections = 0;
};

/// PFA = clutter labeled as cluster / true clutter; PD = cluster members
/// labeled as cluster / true cluster members. Throws Error{Consistency} when
/// the UE id sets differ.
ClassificationMetrics classification_metrics(const ClusteringResult& result, const GroundTruthScenario& truth);

}  // namespace ecoap
