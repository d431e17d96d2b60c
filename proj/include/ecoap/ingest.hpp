#pragma once

#include <span>
#include <vector>

#include "ecoap/radio_env.hpp"
#include "ecoap/rss_matrix.hpp"

namespace ecoap {

enum class MeanDomain { Db, Mw };

struct IngestConfig {
  double max_outlier_fraction = 0.2;
  MeanDomain mean_domain = MeanDomain::Db;
};

/// Model-selection outlier filter for the detected samples of one link.
///
/// One sweep tries k = 0..floor(f * n) removals of the samples farthest from
/// the median (ties: larger value first). Each candidate is scored as
///
///   loglik(Gaussian MLE on retained) + (n - k) ln((n - k) / n)
///     + k ln(k / (150 n)) - 0.5 (2 + k) ln(n)
///
/// i.e. a BIC on the classification likelihood of a Gaussian plus a uniform
/// background over the valid RSS span [-120, 30] dBm (150 dB) with outlier
/// weight k / n, where each removed sample costs one parameter. The best k
/// wins; ties go to the smaller k. Sweeps repeat on the retained set until
/// one selects k = 0, which makes the filter idempotent.
///
/// Fewer than 3 samples pass through unchanged. Retained samples keep their
/// input order.
std::vector<double> eliminate_outliers(std::span<const double> samples, double max_outlier_fraction);

/// Mean of one link's stream: kNotDetected if more than half the samples
/// are undetected, otherwise the mean of the outlier-filtered detections.
double aggregate_link(std::span<const double> samples, const IngestConfig& config);

/// Collapses per-link streams into the RSS matrix.
RssMatrix aggregate(const RssSampleSet& set, const IngestConfig& config = {});

/// Re-expresses `matrix` as if AP a transmitted at `new_powers[a]`; detected
/// entries shift by (new - ref) dB and drop to kNotDetected under
/// `sensitivity`. When `power_levels` is non-empty each new power must lie
/// within that AP's [min, max] level range.
RssMatrix apply_power_offset(const RssMatrix& matrix, std::span<const double> new_powers, double sensitivity,
                             std::span<const std::vector<double>> power_levels = {});

}  // namespace ecoap
