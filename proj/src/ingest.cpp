#include "ecoap/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "ecoap/error.hpp"

namespace ecoap {

namespace {

constexpr double kVarianceFloor = 1e-4;  // dB^2; keeps constant streams finite
const double kLogOutlierDensity = -std::log(kMaxRssDbm - kMinRssDbm);

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// One model-selection sweep. Returns the number of samples to drop and the
// removal order (indices into `x`).
std::size_t select_removals(std::span<const double> x, double fraction, std::vector<std::size_t>& order) {
  const std::size_t n = x.size();
  const double med = median_of({x.begin(), x.end()});
  order.resize(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double da = std::abs(x[a] - med), db = std::abs(x[b] - med);
    if (da != db) return da > db;
    return x[a] > x[b];
  });

  std::size_t kmax = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
  kmax = std::min(kmax, n - 2);
  const double log_n = std::log(static_cast<double>(n));

  std::size_t best_k = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= kmax; ++k) {
    // Sums run in removal order, which depends only on the values.
    const auto m = static_cast<double>(n - k);
    double sum = 0.0;
    for (std::size_t i = k; i < n; ++i) sum += x[order[i]];
    const double mean = sum / m;
    double ss = 0.0;
    for (std::size_t i = k; i < n; ++i) ss += (x[order[i]] - mean) * (x[order[i]] - mean);
    const double var_mle = ss / m;
    const double var = std::max(var_mle, kVarianceFloor);
    const double loglik = -0.5 * m * std::log(2.0 * std::numbers::pi * var) - 0.5 * m * var_mle / var;
    // Classification likelihood of a Gaussian plus uniform-background
    // mixture with the outlier weight k / n fitted.
    const double kd = static_cast<double>(k);
    double mixing = m * std::log(m / static_cast<double>(n));
    if (k > 0) mixing += kd * (std::log(kd / static_cast<double>(n)) + kLogOutlierDensity);
    const double score = loglik + mixing - 0.5 * (2.0 + kd) * log_n;
    if (score > best_score) {
      best_score = score;
      best_k = k;
    }
  }
  return best_k;
}

}  // namespace

std::vector<double> eliminate_outliers(std::span<const double> samples, double max_outlier_fraction) {
  std::vector<double> kept(samples.begin(), samples.end());
  std::vector<std::size_t> order;
  while (kept.size() >= 3) {
    const std::size_t k = select_removals(kept, max_outlier_fraction, order);
    if (k == 0) break;
    std::vector<bool> drop(kept.size(), false);
    for (std::size_t i = 0; i < k; ++i) drop[order[i]] = true;
    std::vector<double> next;
    next.reserve(kept.size() - k);
    for (std::size_t i = 0; i < kept.size(); ++i)
      if (!drop[i]) next.push_back(kept[i]);
    kept = std::move(next);
  }
  return kept;
}

double aggregate_link(std::span<const double> samples, const IngestConfig& config) {
  std::vector<double> detected;
  detected.reserve(samples.size());
  for (double s : samples)
    if (is_detected(s)) detected.push_back(s);
  const std::size_t missing = samples.size() - detected.size();
  if (detected.empty() || 2 * missing > samples.size()) return kNotDetected;

  std::vector<double> kept = eliminate_outliers(detected, config.max_outlier_fraction);
  std::sort(kept.begin(), kept.end());  // summation order independent of arrival order
  const auto m = static_cast<double>(kept.size());
  if (config.mean_domain == MeanDomain::Db) {
    return std::accumulate(kept.begin(), kept.end(), 0.0) / m;
  }
  double mw = 0.0;
  for (double v : kept) mw += std::pow(10.0, v / 10.0);
  return 10.0 * std::log10(mw / m);
}

RssMatrix aggregate(const RssSampleSet& set, const IngestConfig& config) {
  if (set.per_link == 0 || set.samples.empty()) throw Error(ErrorKind::Input, "aggregate: empty sample set");
  RssMatrix m(set.ue_ids, set.ap_ids, set.ref_power);
  for (std::size_t u = 0; u < set.ue_count; ++u)
    for (std::size_t a = 0; a < set.ap_count; ++a) m.at(u, a) = aggregate_link(set.link(u, a), config);
  return m;
}

RssMatrix apply_power_offset(const RssMatrix& matrix, std::span<const double> new_powers, double sensitivity,
                             std::span<const std::vector<double>> power_levels) {
  if (new_powers.size() != matrix.ap_count())
    throw Error(ErrorKind::Config, "apply_power_offset: expected " + std::to_string(matrix.ap_count()) + " powers");
  if (!power_levels.empty()) {
    if (power_levels.size() != matrix.ap_count())
      throw Error(ErrorKind::Config, "apply_power_offset: power_levels size mismatch");
    for (std::size_t a = 0; a < new_powers.size(); ++a) {
      const auto& lv = power_levels[a];
      if (lv.empty() || new_powers[a] < lv.front() || new_powers[a] > lv.back())
        throw Error(ErrorKind::Config, "apply_power_offset: power " + std::to_string(new_powers[a]) +
                                           " dBm outside the range of AP " + std::to_string(matrix.ap_ids[a]));
    }
  }
  RssMatrix out = matrix;
  for (std::size_t a = 0; a < matrix.ap_count(); ++a) {
    const double shift = new_powers[a] - matrix.ref_power[a];
    if (shift == 0.0) continue;
    for (std::size_t u = 0; u < matrix.ue_count(); ++u) {
      double& v = out.at(u, a);
      if (!is_detected(v)) continue;
      v += shift;
      if (v < sensitivity) v = kNotDetected;
    }
  }
  out.ref_power.assign(new_powers.begin(), new_powers.end());
  return out;
}

}  // namespace ecoap
