#include "ecoap/radio_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Cholesky>

#include "ecoap/error.hpp"
#include "ecoap/rng.hpp"

namespace ecoap {

namespace {

bool inside_zone(Vec2 p, const ClusterZone& z) { return distance(p, z.center) <= z.radius; }

// Partial Fisher-Yates: the first `count` entries of `pool` become the draw.
std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool, std::size_t count,
                                                  Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

std::string fmt(double v) { return std::to_string(v); }

}  // namespace

void ApNode::validate() const {
  if (power_levels.empty()) throw Error(ErrorKind::Config, "AP " + std::to_string(id) + ": empty power_levels");
  for (std::size_t i = 1; i < power_levels.size(); ++i) {
    if (!(power_levels[i] > power_levels[i - 1]))
      throw Error(ErrorKind::Config, "AP " + std::to_string(id) + ": power_levels must be strictly increasing");
  }
  if (std::find(power_levels.begin(), power_levels.end(), tx_power) == power_levels.end())
    throw Error(ErrorKind::Config, "AP " + std::to_string(id) + ": tx_power not among power_levels");
  if (!(watts_on > watts_standby) || watts_standby < 0.0)
    throw Error(ErrorKind::Config, "AP " + std::to_string(id) + ": require watts_on > watts_standby >= 0");
}

void PropagationModel::validate() const {
  if (!(exponent > 0.0)) throw Error(ErrorKind::Config, "propagation.exponent must be > 0");
  if (!(shadow_sigma >= 0.0)) throw Error(ErrorKind::Config, "propagation.shadow_sigma must be >= 0");
  if (!(corr_distance > 0.0)) throw Error(ErrorKind::Config, "propagation.corr_distance must be > 0");
  if (!(d0 > 0.0)) throw Error(ErrorKind::Config, "propagation.d0 must be > 0");
}

void GroundTruthScenario::validate() const {
  if (true_label.size() != ues.size())
    throw Error(ErrorKind::Input, "scenario: label count differs from UE count");
  const int k = static_cast<int>(zones.size());
  for (std::size_t i = 0; i < ues.size(); ++i) {
    const Vec2 p = ues[i].position;
    if (p.x < 0.0 || p.y < 0.0 || p.x > area.x || p.y > area.y)
      throw Error(ErrorKind::Input, "scenario: UE " + std::to_string(ues[i].id) + " outside area");
    const double gx = p.x / grid_spacing - 0.5;
    const double gy = p.y / grid_spacing - 0.5;
    if (std::abs(gx - std::round(gx)) > 1e-9 || std::abs(gy - std::round(gy)) > 1e-9)
      throw Error(ErrorKind::Input, "scenario: UE " + std::to_string(ues[i].id) + " off grid");
    const int label = true_label[i];
    if (label == kClutter) {
      for (const auto& z : zones) {
        if (inside_zone(p, z))
          throw Error(ErrorKind::Input, "scenario: clutter UE " + std::to_string(ues[i].id) + " inside a zone");
      }
    } else if (label < 1 || label > k || !inside_zone(p, zones[label - 1])) {
      throw Error(ErrorKind::Input, "scenario: UE " + std::to_string(ues[i].id) + " outside its zone");
    }
  }
}

std::vector<ApNode> place_aps(int count, Vec2 area, std::uint64_t seed, const ApDefaults& defaults) {
  if (count < 1) throw Error(ErrorKind::Config, "ap_count must be >= 1");
  if (!(area.x > 0.0) || !(area.y > 0.0)) throw Error(ErrorKind::Config, "area must be positive");

  const int cols = std::max(1, static_cast<int>(std::lround(std::sqrt(count * area.x / area.y))));
  const int rows = (count + cols - 1) / cols;
  const double cell_h = area.y / rows;

  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> jitter(-0.25, 0.25);

  std::vector<ApNode> aps;
  aps.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int r = i / cols;
    const int in_row = std::min(cols, count - r * cols);  // last row may be partial
    const double cell_w = area.x / in_row;
    const int c = i % cols;
    ApNode ap;
    ap.id = i;
    ap.power_levels = defaults.power_levels;
    ap.tx_power = ap.max_power();
    ap.watts_on = defaults.watts_on;
    ap.watts_standby = defaults.watts_standby;
    const double jx = jitter(rng);
    const double jy = jitter(rng);
    ap.position = {(c + 0.5 + jx) * cell_w, (r + 0.5 + jy) * cell_h};
    ap.validate();
    aps.push_back(std::move(ap));
  }
  return aps;
}

std::vector<Vec2> grid_points(Vec2 area, double spacing) {
  const auto nx = static_cast<std::size_t>(std::floor(area.x / spacing + 1e-9));
  const auto ny = static_cast<std::size_t>(std::floor(area.y / spacing + 1e-9));
  std::vector<Vec2> pts;
  pts.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) pts.push_back({(i + 0.5) * spacing, (j + 0.5) * spacing});
  return pts;
}

GroundTruthScenario sample_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (!(cfg.area.x > 0.0) || !(cfg.area.y > 0.0)) throw Error(ErrorKind::Config, "scenario.area must be positive");
  if (!(cfg.grid_spacing > 0.0)) throw Error(ErrorKind::Config, "scenario.grid_spacing must be > 0");
  if (cfg.n_clusters < 0) throw Error(ErrorKind::Config, "scenario.n_clusters must be >= 0");
  if (cfg.cluster_density < 0.0 || cfg.clutter_density < 0.0)
    throw Error(ErrorKind::Config, "scenario densities must be >= 0");
  if (cfg.n_clusters > 0 && !(cfg.cluster_radius > 0.0))
    throw Error(ErrorKind::Config, "scenario.cluster_radius must be > 0");

  GroundTruthScenario sc;
  sc.area = cfg.area;
  sc.grid_spacing = cfg.grid_spacing;
  sc.seed = seed;
  sc.aps = place_aps(cfg.ap_count, cfg.area, derive_seed(seed, Stream::ApLayout), cfg.ap);

  // Zones: discs fully inside the area, pairwise disjoint.
  const double r = cfg.cluster_radius;
  Rng zone_rng = make_rng(derive_seed(seed, Stream::Zones));
  for (int k = 0; k < cfg.n_clusters; ++k) {
    if (2.0 * r > cfg.area.x || 2.0 * r > cfg.area.y)
      throw Error(ErrorKind::Placement, "cluster zone of radius " + fmt(r) + " does not fit the area");
    std::uniform_real_distribution<double> ux(r, cfg.area.x - r);
    std::uniform_real_distribution<double> uy(r, cfg.area.y - r);
    bool placed = false;
    for (int attempt = 0; attempt < cfg.max_placement_attempts && !placed; ++attempt) {
      const Vec2 c{ux(zone_rng), uy(zone_rng)};
      placed = std::all_of(sc.zones.begin(), sc.zones.end(),
                           [&](const ClusterZone& z) { return distance(c, z.center) > 2.0 * r; });
      if (placed) sc.zones.push_back({c, r});
    }
    if (!placed)
      throw Error(ErrorKind::Placement, "could not place " + std::to_string(cfg.n_clusters) +
                                            " disjoint zones after " +
                                            std::to_string(cfg.max_placement_attempts) + " attempts");
  }

  const std::vector<Vec2> grid = grid_points(cfg.area, cfg.grid_spacing);
  Rng ue_rng = make_rng(derive_seed(seed, Stream::Ues));
  auto add_ues = [&](const std::vector<std::size_t>& picks, int label) {
    for (std::size_t g : picks) {
      UeDevice ue;
      ue.id = static_cast<int>(sc.ues.size());
      ue.position = grid[g];
      ue.demand = cfg.demand;
      sc.ues.push_back(ue);
      sc.true_label.push_back(label);
    }
  };

  const double zone_area = std::numbers::pi * r * r;
  for (std::size_t k = 0; k < sc.zones.size(); ++k) {
    std::vector<std::size_t> pool;
    for (std::size_t g = 0; g < grid.size(); ++g)
      if (inside_zone(grid[g], sc.zones[k])) pool.push_back(g);
    const auto want = static_cast<std::size_t>(std::llround(cfg.cluster_density * zone_area));
    if (want > pool.size())
      throw Error(ErrorKind::Infeasible, "cluster " + std::to_string(k + 1) + " needs " + std::to_string(want) +
                                             " UEs but its zone holds " + std::to_string(pool.size()) +
                                             " gridpoints");
    add_ues(draw_without_replacement(std::move(pool), want, ue_rng), static_cast<int>(k + 1));
  }

  std::vector<std::size_t> pool;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const bool free = std::none_of(sc.zones.begin(), sc.zones.end(),
                                   [&](const ClusterZone& z) { return inside_zone(grid[g], z); });
    if (free) pool.push_back(g);
  }
  const double remaining = cfg.area.x * cfg.area.y - zone_area * static_cast<double>(sc.zones.size());
  const auto want = static_cast<std::size_t>(std::llround(cfg.clutter_density * std::max(0.0, remaining)));
  if (want > pool.size())
    throw Error(ErrorKind::Infeasible, "clutter needs " + std::to_string(want) + " UEs but only " +
                                           std::to_string(pool.size()) + " free gridpoints remain");
  add_ues(draw_without_replacement(std::move(pool), want, ue_rng), kClutter);
  return sc;
}

double path_loss(double distance_m, const PropagationModel& model) {
  const double d = std::max(distance_m, model.d0);
  return model.pl0 + 10.0 * model.exponent * std::log10(d / model.d0);
}

Eigen::MatrixXd shadowing_field(std::span<const Vec2> positions, const PropagationModel& model,
                                std::size_t field_count, std::uint64_t seed, std::size_t max_positions) {
  if (positions.size() > max_positions)
    throw Error(ErrorKind::Input, "shadowing_field: " + std::to_string(positions.size()) +
                                      " positions exceed the bound of " + std::to_string(max_positions));
  const auto n = static_cast<Eigen::Index>(positions.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(field_count));
  if (n == 0 || field_count == 0 || model.shadow_sigma == 0.0) return out;

  // Coincident positions would make the covariance singular; factor the
  // distinct ones and copy values back.
  std::vector<Vec2> unique;
  std::vector<Eigen::Index> slot(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Vec2 p = positions[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error(ErrorKind::Input, "shadowing_field: non-finite position");
    auto it = std::find_if(unique.begin(), unique.end(), [&](Vec2 q) { return q.x == p.x && q.y == p.y; });
    slot[i] = static_cast<Eigen::Index>(it - unique.begin());
    if (it == unique.end()) unique.push_back(p);
  }

  const auto m = static_cast<Eigen::Index>(unique.size());
  const double var = model.shadow_sigma * model.shadow_sigma;
  Eigen::MatrixXd cov(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j)
      cov(i, j) = cov(j, i) = var * std::exp(-distance(unique[i], unique[j]) / model.corr_distance);

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-9;
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw Error(ErrorKind::Numerical, "shadowing_field: covariance not positive definite after jitter");
  }

  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd z(m, static_cast<Eigen::Index>(field_count));
  for (Eigen::Index f = 0; f < z.cols(); ++f)
    for (Eigen::Index i = 0; i < m; ++i) z(i, f) = gauss(rng);
  const Eigen::MatrixXd fields = llt.matrixL() * z;

  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = fields.row(slot[static_cast<std::size_t>(i)]);
  return out;
}

RssSampleSet generate_samples(const GroundTruthScenario& scenario, const PropagationModel& model,
                              std::size_t samples_per_link, std::uint64_t seed, const SampleNoise& noise) {
  if (samples_per_link < 1) throw Error(ErrorKind::Config, "samples_per_link must be >= 1");
  model.validate();

  RssSampleSet set;
  set.ue_count = scenario.ues.size();
  set.ap_count = scenario.aps.size();
  set.per_link = samples_per_link;
  for (const auto& ue : scenario.ues) set.ue_ids.push_back(ue.id);
  for (const auto& ap : scenario.aps) {
    set.ap_ids.push_back(ap.id);
    set.ref_power.push_back(ap.tx_power);
  }
  set.samples.resize(set.ue_count * set.ap_count * samples_per_link);

  std::vector<Vec2> positions;
  positions.reserve(set.ue_count);
  for (const auto& ue : scenario.ues) positions.push_back(ue.position);
  const Eigen::MatrixXd shadow =
      shadowing_field(positions, model, set.ap_count, derive_seed(seed, Stream::Shadowing));

  Rng rng = make_rng(derive_seed(seed, Stream::Samples));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> magnitude(noise.outlier_min, noise.outlier_max);

  auto* out = set.samples.data();
  for (std::size_t u = 0; u < set.ue_count; ++u) {
    for (std::size_t a = 0; a < set.ap_count; ++a) {
      const auto& ap = scenario.aps[a];
      const double mean = ap.tx_power - path_loss(distance(scenario.ues[u].position, ap.position), model) +
                          shadow(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(a));
      for (std::size_t s = 0; s < samples_per_link; ++s) {
        double v = mean + noise.meas_sigma * gauss(rng);
        if (unit(rng) < noise.outlier_prob) {
          const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
          v += sign * magnitude(rng);
        }
        *out++ = v < model.sensitivity ? kNotDetected : v;
      }
    }
  }
  return set;
}

}  // namespace ecoap
