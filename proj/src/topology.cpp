#include "ecoap/topology.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include <omp.h>

#include "ecoap/error.hpp"
#include "ecoap/ingest.hpp"

namespace ecoap {

void QosModel::validate() const {
  if (rate_table.empty()) throw Error(ErrorKind::Config, "qos.rate_table must not be empty");
  for (std::size_t i = 0; i < rate_table.size(); ++i) {
    if (!(rate_table[i].rate > 0.0)) throw Error(ErrorKind::Config, "qos.rate_table: rates must be > 0");
    if (i > 0 && !(rate_table[i].min_rss < rate_table[i - 1].min_rss && rate_table[i].rate < rate_table[i - 1].rate))
      throw Error(ErrorKind::Config, "qos.rate_table: thresholds and rates must both strictly decrease");
  }
  if (!(airtime_cap > 0.0)) throw Error(ErrorKind::Config, "qos.airtime_cap must be > 0");
}

double rate_from_rss(double rss, const QosModel& qos) {
  if (!is_detected(rss)) return 0.0;
  for (const auto& step : qos.rate_table)
    if (rss >= step.min_rss) return step.rate;
  return 0.0;
}

std::vector<ApSpec> ap_specs(std::span<const ApNode> aps) {
  std::vector<ApSpec> out;
  out.reserve(aps.size());
  for (const auto& ap : aps) out.push_back({ap.power_levels, ap.watts_on, ap.watts_standby});
  return out;
}

std::vector<int> assign_ues(const RssMatrix& matrix, const std::vector<bool>& active) {
  std::vector<int> out(matrix.ue_count(), kUnserved);
  for (std::size_t u = 0; u < matrix.ue_count(); ++u) {
    int best = kUnserved;
    for (std::size_t a = 0; a < matrix.ap_count(); ++a) {
      if (!active[a]) continue;
      const double v = matrix.at(u, a);
      if (!is_detected(v)) continue;
      if (best == kUnserved) {
        best = static_cast<int>(a);
        continue;
      }
      const double bv = matrix.at(u, static_cast<std::size_t>(best));
      if (v > bv || (v == bv && matrix.ap_ids[a] < matrix.ap_ids[static_cast<std::size_t>(best)]))
        best = static_cast<int>(a);
    }
    out[u] = best;
  }
  return out;
}

Feasibility check_feasibility(const RssMatrix& matrix, const Candidate& cand, std::span<const double> demands,
                              const QosModel& qos, std::span<const ApSpec> aps) {
  const std::size_t n_ap = matrix.ap_count();
  if (cand.active.size() != n_ap || cand.power.size() != n_ap || aps.size() != n_ap)
    throw Error(ErrorKind::Input, "check_feasibility: per-AP vectors must match the matrix columns");
  if (demands.size() != matrix.ue_count())
    throw Error(ErrorKind::Input, "check_feasibility: demand count differs from UE count");

  std::vector<double> powers(n_ap);
  for (std::size_t a = 0; a < n_ap; ++a) {
    if (!cand.active[a]) {
      powers[a] = matrix.ref_power[a];
      continue;
    }
    const double p = cand.power[a];
    if (p < aps[a].min_power() || p > aps[a].max_power())
      throw Error(ErrorKind::Config, "check_feasibility: power " + std::to_string(p) + " dBm outside levels of AP " +
                                         std::to_string(matrix.ap_ids[a]));
    powers[a] = p;
  }
  const RssMatrix shifted = apply_power_offset(matrix, powers, qos.sensitivity);

  Feasibility fe;
  fe.assignment = assign_ues(shifted, cand.active);
  fe.airtime.assign(n_ap, 0.0);
  for (std::size_t u = 0; u < matrix.ue_count(); ++u) {
    const int a = fe.assignment[u];
    if (a == kUnserved) {
      fe.violations.push_back({Violation::Kind::Uncovered, u, 0.0});
      continue;
    }
    if (demands[u] == 0.0) continue;
    const double rate = rate_from_rss(shifted.at(u, static_cast<std::size_t>(a)), qos);
    fe.airtime[static_cast<std::size_t>(a)] +=
        rate > 0.0 ? demands[u] / rate : std::numeric_limits<double>::infinity();
  }
  for (std::size_t a = 0; a < n_ap; ++a)
    if (cand.active[a] && fe.airtime[a] > qos.airtime_cap)
      fe.violations.push_back({Violation::Kind::Overloaded, a, fe.airtime[a]});
  fe.feasible = fe.violations.empty();
  return fe;
}

std::vector<std::size_t> switch_off_priority(const RssMatrix& matrix, const ClusteringResult& clusters,
                                             const std::vector<bool>& active, PriorityRule rule) {
  if (clusters.ue_ids != matrix.ue_ids)
    throw Error(ErrorKind::Consistency, "switch_off_priority: clustering and matrix cover different UEs");
  const auto assignment = assign_ues(matrix, active);
  std::vector<std::size_t> members(matrix.ap_count(), 0), load(matrix.ap_count(), 0);
  for (std::size_t u = 0; u < assignment.size(); ++u) {
    if (assignment[u] == kUnserved) continue;
    const auto a = static_cast<std::size_t>(assignment[u]);
    ++load[a];
    if (clusters.labels[u] != kClutter) ++members[a];
  }
  std::vector<std::size_t> order;
  for (std::size_t a = 0; a < matrix.ap_count(); ++a)
    if (active[a]) order.push_back(a);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (rule == PriorityRule::ClusterAware && members[x] != members[y]) return members[x] < members[y];
    if (load[x] != load[y]) return load[x] < load[y];
    return matrix.ap_ids[x] < matrix.ap_ids[y];
  });
  return order;
}

double total_watts(const std::vector<bool>& active, std::span<const ApSpec> aps) {
  double w = 0.0;
  for (std::size_t a = 0; a < aps.size(); ++a) w += active[a] ? aps[a].watts_on : aps[a].watts_standby;
  return w;
}

namespace {

TopologyPlan make_plan(const RssMatrix& matrix, const Candidate& cand, const Feasibility& fe,
                       std::span<const ApSpec> aps) {
  TopologyPlan plan;
  plan.ap_ids = matrix.ap_ids;
  plan.ue_ids = matrix.ue_ids;
  plan.active = cand.active;
  plan.power = cand.power;
  plan.assignment = fe.assignment;
  plan.feasible = fe.feasible;
  plan.violations = fe.violations;
  plan.off_count = static_cast<int>(std::count(cand.active.begin(), cand.active.end(), false));
  plan.total_watts = total_watts(cand.active, aps);
  return plan;
}

Candidate all_on_max(std::span<const ApSpec> aps) {
  Candidate c;
  c.active.assign(aps.size(), true);
  for (const auto& ap : aps) c.power.push_back(ap.max_power());
  return c;
}

std::size_t level_index(const ApSpec& ap, double power) {
  const auto it = std::lower_bound(ap.power_levels.begin(), ap.power_levels.end(), power);
  return static_cast<std::size_t>(it - ap.power_levels.begin());
}

// Raises powers of active APs toward uncovered UEs, one level per AP per
// round, until the candidate is feasible or nothing can be raised.
bool repair_coverage(const RssMatrix& matrix, Candidate& cand, Feasibility& fe, std::span<const double> demands,
                     const QosModel& qos, std::span<const ApSpec> aps) {
  while (!fe.feasible) {
    std::vector<bool> raise(matrix.ap_count(), false);
    bool any_uncovered = false;
    for (const auto& v : fe.violations) {
      if (v.kind != Violation::Kind::Uncovered) continue;
      any_uncovered = true;
      int best = -1;
      double best_rss = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < matrix.ap_count(); ++a) {
        const double rss = matrix.at(v.index, a);
        if (!cand.active[a] || !is_detected(rss)) continue;
        const double potential = rss + aps[a].max_power() - matrix.ref_power[a];
        if (potential >= qos.sensitivity && potential > best_rss) {
          best_rss = potential;
          best = static_cast<int>(a);
        }
      }
      if (best < 0) return false;
      const auto b = static_cast<std::size_t>(best);
      if (cand.power[b] < aps[b].max_power()) raise[b] = true;
    }
    if (!any_uncovered || std::none_of(raise.begin(), raise.end(), [](bool r) { return r; })) return false;
    for (std::size_t a = 0; a < raise.size(); ++a)
      if (raise[a]) cand.power[a] = aps[a].power_levels[level_index(aps[a], cand.power[a]) + 1];
    fe = check_feasibility(matrix, cand, demands, qos, aps);
  }
  return true;
}

}  // namespace

TopologyPlan baseline_plan(const RssMatrix& matrix, std::span<const double> demands, const QosModel& qos,
                           std::span<const ApSpec> aps) {
  const Candidate c = all_on_max(aps);
  return make_plan(matrix, c, check_feasibility(matrix, c, demands, qos, aps), aps);
}

TopologyPlan greedy_optimize(const RssMatrix& matrix, std::span<const double> demands,
                             const ClusteringResult& clusters, const QosModel& qos, std::span<const ApSpec> aps,
                             const GreedyOptions& options) {
  for (double d : demands)
    if (!(d >= 0.0)) throw Error(ErrorKind::Input, "greedy_optimize: demands must be >= 0");
  Candidate cur = all_on_max(aps);
  Feasibility fe = check_feasibility(matrix, cur, demands, qos, aps);
  if (!fe.feasible) return make_plan(matrix, cur, fe, aps);

  for (;;) {
    const RssMatrix shifted = apply_power_offset(matrix, cur.power, qos.sensitivity);
    bool accepted = false;
    for (std::size_t a : switch_off_priority(shifted, clusters, cur.active, options.priority)) {
      Candidate trial = cur;
      trial.active[a] = false;
      Feasibility tf = check_feasibility(matrix, trial, demands, qos, aps);
      if (!tf.feasible && !repair_coverage(matrix, trial, tf, demands, qos, aps)) continue;
      cur = std::move(trial);
      fe = std::move(tf);
      accepted = true;
      break;
    }
    if (!accepted) break;
  }

  while (options.trim_power) {
    std::vector<std::size_t> order;
    for (std::size_t a = 0; a < aps.size(); ++a)
      if (cur.active[a]) order.push_back(a);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (fe.airtime[x] != fe.airtime[y]) return fe.airtime[x] < fe.airtime[y];
      return matrix.ap_ids[x] < matrix.ap_ids[y];
    });
    bool changed = false;
    for (std::size_t a : order) {
      const std::size_t idx = level_index(aps[a], cur.power[a]);
      if (idx == 0) continue;
      const double saved = cur.power[a];
      cur.power[a] = aps[a].power_levels[idx - 1];
      Feasibility tf = check_feasibility(matrix, cur, demands, qos, aps);
      if (tf.feasible) {
        fe = std::move(tf);
        changed = true;
      } else {
        cur.power[a] = saved;
      }
    }
    if (!changed) break;
  }
  return make_plan(matrix, cur, fe, aps);
}

namespace {

struct OracleBest {
  bool found = false;
  int off = -1;
  double watts = std::numeric_limits<double>::infinity();
  std::uint32_t mask = 0;
  std::uint32_t pmask = 0;
};

bool better(const OracleBest& a, const OracleBest& b) {
  if (!a.found) return false;
  if (!b.found) return true;
  if (a.off != b.off) return a.off > b.off;
  if (a.watts != b.watts) return a.watts < b.watts;
  if (a.mask != b.mask) return a.mask < b.mask;
  return a.pmask < b.pmask;
}

// Scans subset masks in [lo, hi). Within a mask the watts are fixed, so the
// first feasible power mask is that mask's best.
void oracle_scan(const RssMatrix& matrix, std::span<const double> demands, const QosModel& qos,
                 std::span<const ApSpec> aps, std::uint32_t lo, std::uint32_t hi, OracleBest& best) {
  const auto n = static_cast<int>(aps.size());
  Candidate cand;
  cand.active.resize(aps.size());
  cand.power.resize(aps.size());
  std::vector<std::size_t> on;
  for (std::uint32_t mask = lo; mask < hi; ++mask) {
    const int off = n - std::popcount(mask);
    if (best.found && off < best.off) continue;
    on.clear();
    for (int a = 0; a < n; ++a) {
      cand.active[static_cast<std::size_t>(a)] = (mask >> a) & 1U;
      if (cand.active[static_cast<std::size_t>(a)]) on.push_back(static_cast<std::size_t>(a));
    }
    const double watts = total_watts(cand.active, aps);
    if (best.found && off == best.off && watts > best.watts) continue;
    const std::uint32_t pcount = 1U << on.size();
    for (std::uint32_t pmask = 0; pmask < pcount; ++pmask) {
      for (std::size_t a = 0; a < aps.size(); ++a) cand.power[a] = aps[a].max_power();
      for (std::size_t j = 0; j < on.size(); ++j)
        if ((pmask >> j) & 1U) cand.power[on[j]] = aps[on[j]].min_power();
      if (!check_feasibility(matrix, cand, demands, qos, aps).feasible) continue;
      const OracleBest here{true, off, watts, mask, pmask};
      if (better(here, best)) best = here;
      break;
    }
  }
}

}  // namespace

TopologyPlan exhaustive_oracle(const RssMatrix& matrix, std::span<const double> demands, const QosModel& qos,
                               std::span<const ApSpec> aps, int max_aps, Exec exec, int threads) {
  const auto n = static_cast<int>(aps.size());
  if (n > max_aps || n > 20)
    throw Error(ErrorKind::Input, "exhaustive_oracle: " + std::to_string(n) + " APs exceed the limit of " +
                                      std::to_string(max_aps));
  const std::uint32_t count = 1U << n;
  OracleBest best;
  if (exec == Exec::Serial) {
    oracle_scan(matrix, demands, qos, aps, 0, count, best);
  } else {
    constexpr std::uint32_t kChunk = 64;
    const auto chunks = static_cast<std::int64_t>((count + kChunk - 1) / kChunk);
#pragma omp parallel num_threads(threads > 0 ? threads : omp_get_max_threads())
    {
      OracleBest local;
#pragma omp for schedule(dynamic)
      for (std::int64_t c = 0; c < chunks; ++c) {
        const auto lo = static_cast<std::uint32_t>(c) * kChunk;
        oracle_scan(matrix, demands, qos, aps, lo, std::min(count, lo + kChunk), local);
      }
#pragma omp critical(ecoap_oracle_reduce)
      if (better(local, best)) best = local;
    }
  }

  if (!best.found) return baseline_plan(matrix, demands, qos, aps);
  Candidate cand;
  for (int a = 0; a < n; ++a) {
    const bool on = (best.mask >> a) & 1U;
    cand.active.push_back(on);
    cand.power.push_back(aps[static_cast<std::size_t>(a)].max_power());
  }
  std::size_t j = 0;
  for (int a = 0; a < n; ++a) {
    if (!cand.active[static_cast<std::size_t>(a)]) continue;
    if ((best.pmask >> j) & 1U) cand.power[static_cast<std::size_t>(a)] = aps[static_cast<std::size_t>(a)].min_power();
    ++j;
  }
  return make_plan(matrix, cand, check_feasibility(matrix, cand, demands, qos, aps), aps);
}

EnergyReport energy_report(const TopologyPlan& plan, const TopologyPlan& baseline) {
  if (plan.active.size() != baseline.active.size())
    throw Error(ErrorKind::Consistency, "energy_report: plans cover different AP sets");
  EnergyReport r;
  r.watts_saved = baseline.total_watts - plan.total_watts;
  if (baseline.total_watts != 0.0) r.fraction_saved = r.watts_saved / baseline.total_watts;
  return r;
}

}  // namespace ecoap
