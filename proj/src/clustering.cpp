#include "ecoap/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <string>

#include "ecoap/error.hpp"

namespace ecoap {

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

double compute_threshold(std::vector<double> density, const ClusteringConfig& cfg) {
  switch (cfg.threshold_rule) {
    case ThresholdRule::Mean: {
      std::sort(density.begin(), density.end());
      return std::accumulate(density.begin(), density.end(), 0.0) / static_cast<double>(density.size());
    }
    case ThresholdRule::GeometricMean: {
      std::sort(density.begin(), density.end());
      double log_sum = 0.0;
      for (double f : density) log_sum += std::log(f);
      return std::exp(log_sum / static_cast<double>(density.size()));
    }
    case ThresholdRule::Quantile: {
      std::sort(density.begin(), density.end());
      const double pos = std::clamp(cfg.threshold_param, 0.0, 1.0) * static_cast<double>(density.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, density.size() - 1);
      return density[lo] + (pos - static_cast<double>(lo)) * (density[hi] - density[lo]);
    }
    case ThresholdRule::Absolute:
      return cfg.threshold_param;
  }
  return 0.0;
}

}  // namespace

KdeModel::KdeModel(Points points, double bandwidth) : points_(std::move(points)), h_(bandwidth) {
  if (!(h_ > 0.0)) throw Error(ErrorKind::Input, "KdeModel: bandwidth must be > 0");
  if (points_.n == 0) throw Error(ErrorKind::Input, "KdeModel: no points");
  for (double v : points_.data)
    if (!std::isfinite(v)) throw Error(ErrorKind::Input, "KdeModel: non-finite coordinate");
  const auto m = static_cast<double>(points_.dim);
  norm_ = std::pow(2.0 * std::numbers::pi, -0.5 * m) * std::pow(h_, -m) / static_cast<double>(points_.n);
}

double select_bandwidth(const Points& pts) {
  if (pts.n < 2) throw Error(ErrorKind::Degenerate, "select_bandwidth: need at least 2 points");
  const auto n = static_cast<double>(pts.n);
  const auto m = static_cast<double>(pts.dim);
  double var_sum = 0.0;
  for (std::size_t d = 0; d < pts.dim; ++d) {
    double mean = 0.0;
    for (std::size_t i = 0; i < pts.n; ++i) mean += pts.data[i * pts.dim + d];
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < pts.n; ++i) {
      const double diff = pts.data[i * pts.dim + d] - mean;
      ss += diff * diff;
    }
    var_sum += ss / (n - 1.0);
  }
  const double sigma = std::sqrt(var_sum / m);
  if (!(sigma > 0.0)) throw Error(ErrorKind::Degenerate, "select_bandwidth: all points identical");
  return sigma * std::pow(4.0 / ((m + 2.0) * n), 1.0 / (m + 4.0));
}

double kde_at(const KdeModel& model, std::span<const double> x) {
  return model.normalizer() * kernels::gaussian_sum(model.points(), x, model.bandwidth());
}

MeanShiftOutcome mean_shift(const KdeModel& model, std::span<const double> start, double tol, int max_iter) {
  if (!(tol > 0.0)) throw Error(ErrorKind::Input, "mean_shift: tol must be > 0");
  return kernels::mean_shift(model.points(), start, model.bandwidth(), tol, max_iter);
}

ClusteringResult cluster(const Points& points, std::span<const int> ue_ids, const ClusteringConfig& cfg) {
  ClusteringResult res;
  const std::size_t n = points.n;
  if (ue_ids.empty()) {
    res.ue_ids.resize(n);
    std::iota(res.ue_ids.begin(), res.ue_ids.end(), 0);
  } else {
    if (ue_ids.size() != n) throw Error(ErrorKind::Input, "cluster: ue_ids size differs from point count");
    res.ue_ids.assign(ue_ids.begin(), ue_ids.end());
  }
  res.labels.assign(n, kClutter);
  res.converged.assign(n, true);
  if (n == 0) return res;

  try {
    res.bandwidth = cfg.bandwidth_scale * select_bandwidth(points);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Degenerate) throw;
    res.bandwidth = 1.0;
    res.degenerate = true;
  }
  const KdeModel model(points, res.bandwidth);
  const double h = res.bandwidth;

  const std::vector<double> sums = cfg.threads == 1 ? kernels::serial::gaussian_sums(points, points, h)
                                                    : kernels::parallel::gaussian_sums(points, points, h, cfg.threads);
  res.density.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.density[i] = model.normalizer() * sums[i];
  res.threshold = compute_threshold(res.density, cfg);
  if (res.degenerate) return res;

  std::vector<std::size_t> dense;
  for (std::size_t i = 0; i < n; ++i)
    if (res.density[i] > res.threshold) dense.push_back(i);
  if (dense.empty()) return res;

  // Each dense point gets a representative location: its mode (mean shift)
  // or itself (connected components); representatives within the merge
  // radius are joined transitively.
  Points reps(dense.size(), points.dim);
  double merge_radius = cfg.mode_merge_factor * h;
  if (cfg.extraction == Extraction::MeanShift) {
    Points starts(dense.size(), points.dim);
    for (std::size_t j = 0; j < dense.size(); ++j) std::ranges::copy(points.row(dense[j]), starts.row(j).begin());
    const double tol = cfg.tol_factor * h;
    auto outcomes = cfg.threads == 1
                        ? kernels::serial::mean_shift_all(points, starts, h, tol, cfg.max_iter)
                        : kernels::parallel::mean_shift_all(points, starts, h, tol, cfg.max_iter, cfg.threads);
    for (std::size_t j = 0; j < dense.size(); ++j) {
      std::ranges::copy(outcomes[j].mode, reps.row(j).begin());
      res.converged[dense[j]] = outcomes[j].converged;
      res.ascent_violations += outcomes[j].ascent_violations;
    }
    res.mean_shift_runs = static_cast<int>(dense.size());
  } else {
    for (std::size_t j = 0; j < dense.size(); ++j) std::ranges::copy(points.row(dense[j]), reps.row(j).begin());
    merge_radius = h;
  }

  DisjointSets sets(dense.size());
  const double r2 = merge_radius * merge_radius;
  for (std::size_t a = 0; a < dense.size(); ++a)
    for (std::size_t b = a + 1; b < dense.size(); ++b)
      if (kernels::squared_distance(reps.row(a), reps.row(b)) <= r2) sets.unite(a, b);

  struct Group {
    std::vector<std::size_t> members;  // indices into `dense`
    int min_id = 0;
  };
  std::map<std::size_t, Group> by_root;
  for (std::size_t j = 0; j < dense.size(); ++j) {
    auto& g = by_root[sets.find(j)];
    const int id = res.ue_ids[dense[j]];
    g.min_id = g.members.empty() ? id : std::min(g.min_id, id);
    g.members.push_back(j);
  }
  std::vector<Group> groups;
  for (auto& [root, g] : by_root) groups.push_back(std::move(g));
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    return a.min_id < b.min_id;
  });

  res.k = static_cast<int>(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::size_t best = groups[g].members.front();
    double best_f = -1.0;
    for (std::size_t j : groups[g].members) {
      res.labels[dense[j]] = static_cast<int>(g + 1);
      const double f = kde_at(model, reps.row(j));
      if (f > best_f || (f == best_f && res.ue_ids[dense[j]] < res.ue_ids[dense[best]])) {
        best_f = f;
        best = j;
      }
    }
    const auto mode = reps.row(best);
    res.modes.emplace_back(mode.begin(), mode.end());
  }
  return res;
}

Points rss_points(const RssMatrix& matrix, double sensitivity, double impute_offset) {
  Points pts(matrix.ue_count(), matrix.ap_count());
  for (std::size_t i = 0; i < matrix.values.size(); ++i) {
    const double v = matrix.values[i];
    pts.data[i] = is_detected(v) ? v : sensitivity - impute_offset;
  }
  return pts;
}

ClusteringResult cluster_matrix(const RssMatrix& matrix, double sensitivity, const ClusteringConfig& config) {
  return cluster(rss_points(matrix, sensitivity, config.impute_offset), matrix.ue_ids, config);
}

ClassificationMetrics classification_metrics(const ClusteringResult& result, const GroundTruthScenario& truth) {
  if (result.ue_ids.size() != truth.ues.size())
    throw Error(ErrorKind::Consistency, "classification_metrics: result covers " +
                                            std::to_string(result.ue_ids.size()) + " UEs, truth " +
                                            std::to_string(truth.ues.size()));
  std::map<int, int> truth_label;
  for (std::size_t i = 0; i < truth.ues.size(); ++i) truth_label[truth.ues[i].id] = truth.true_label[i];

  ClassificationMetrics m;
  for (std::size_t i = 0; i < result.ue_ids.size(); ++i) {
    auto it = truth_label.find(result.ue_ids[i]);
    if (it == truth_label.end())
      throw Error(ErrorKind::Consistency, "classification_metrics: UE " + std::to_string(result.ue_ids[i]) +
                                              " missing from truth");
    const bool labeled_cluster = result.labels[i] != kClutter;
    if (it->second == kClutter) {
      ++m.true_clutter;
      m.false_alarms += labeled_cluster;
    } else {
      ++m.true_cluster;
      m.detections += labeled_cluster;
    }
  }
  if (m.true_clutter > 0) m.pfa = static_cast<double>(m.false_alarms) / static_cast<double>(m.true_clutter);
  if (m.true_cluster > 0) m.pd = static_cast<double>(m.detections) / static_cast<double>(m.true_cluster);
  return m;
}

}  // namespace ecoap
