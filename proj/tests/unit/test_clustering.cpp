#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <set>

#include "ecoap/clustering.hpp"
#include "ecoap/error.hpp"

using namespace ecoap;

namespace {

Points random_points(std::size_t n, std::size_t dim, std::mt19937_64& rng, double spread = 10.0) {
  Points p(n, dim);
  std::normal_distribution<double> g(-70.0, spread);
  for (auto& v : p.data) v = g(rng);
  return p;
}

// Naive density in long double, straight from the definition.
long double brute_kde(const Points& p, std::span<const double> x, double h) {
  long double total = 0;
  const long double m = p.dim;
  for (std::size_t i = 0; i < p.n; ++i) {
    long double d2 = 0;
    for (std::size_t d = 0; d < p.dim; ++d) {
      long double diff = static_cast<long double>(x[d]) - p.row(i)[d];
      d2 += diff * diff;
    }
    total += std::pow(2 * std::numbers::pi_v<long double>, -m / 2) * std::pow(static_cast<long double>(h), -m) *
             std::exp(-d2 / (2.0L * h * h));
  }
  return total / p.n;
}

// Two tight groups of 20 and two far isolated vectors in 3 dimensions.
Points planted_groups(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  const double a[3]{-50, -60, -70}, b[3]{-80, -50, -65};
  const double lone1[3]{-100, -100, -40}, lone2[3]{-30, -95, -95};
  Points p(42, 3);
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t d = 0; d < 3; ++d) {
      p.row(i)[d] = a[d] + jitter(rng);
      p.row(20 + i)[d] = b[d] + jitter(rng);
    }
  for (std::size_t d = 0; d < 3; ++d) {
    p.row(40)[d] = lone1[d];
    p.row(41)[d] = lone2[d];
  }
  return p;
}

void check_result_invariants(const ClusteringResult& r) {
  std::set<int> used;
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    const int l = r.labels[i];
    CHECK(l >= 0);
    CHECK(l <= r.k);
    if (l != kClutter) {
      used.insert(l);
      CHECK(r.density[i] > r.threshold);
    } else if (!r.degenerate) {
      CHECK(r.density[i] <= r.threshold);
    }
  }
  CHECK(static_cast<int>(used.size()) == r.k);
  CHECK(r.modes.size() == static_cast<std::size_t>(r.k));
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("bandwidth rule") {
  // 100 one-dimensional points with sample standard deviation exactly 4.
  std::mt19937_64 rng(1);
  Points p(100, 1);
  std::normal_distribution<double> g(0, 1);
  for (auto& v : p.data) v = g(rng);
  double mean = 0, ss = 0;
  for (double v : p.data) mean += v;
  mean /= 100;
  for (double v : p.data) ss += (v - mean) * (v - mean);
  const double scale = 4.0 / std::sqrt(ss / 99);
  for (auto& v : p.data) v = (v - mean) * scale;
  const double h = select_bandwidth(p);
  CHECK(h == doctest::Approx(4.0 * std::pow(4.0 / 300.0, 0.2)).epsilon(1e-12));
  CHECK(h == doctest::Approx(1.685).epsilon(1e-3));

  Points q = random_points(50, 4, rng);
  Points q3 = q;
  for (auto& v : q3.data) v *= 3.0;
  CHECK(select_bandwidth(q3) == doctest::Approx(3.0 * select_bandwidth(q)).epsilon(1e-12));

  Points twins(2, 2);
  twins.data = {-60, -70, -60, -70};
  try {
    select_bandwidth(twins);
    FAIL("expected a degenerate-data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }
  CHECK_THROWS_AS(select_bandwidth(Points(1, 3)), Error);
}

TEST_CASE("kde_at") {
  Points one(1, 3);
  one.data = {-60, -70, -80};
  KdeModel single(one, 2.0);
  CHECK(kde_at(single, one.row(0)) == doctest::Approx(std::pow(2 * std::numbers::pi, -1.5) / 8.0).epsilon(1e-14));

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.5, 8.0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t dim = 1 + t % 11;
    Points p = random_points(5 + t, dim, rng);
    KdeModel model(p, u(rng));
    std::vector<double> x(dim);
    for (std::size_t d = 0; d < dim; ++d) x[d] = p.row(t % p.n)[d] + u(rng) - 4.0;
    const long double ref = brute_kde(p, x, model.bandwidth());
    const double got = kde_at(model, x);
    CHECK(got > 0.0);
    CHECK(std::abs(got - ref) <= 1e-12 * ref);
  }

  Points line = random_points(40, 1, rng);
  KdeModel m1(line, select_bandwidth(line));
  double lo = *std::min_element(line.data.begin(), line.data.end()) - 12 * m1.bandwidth();
  double hi = *std::max_element(line.data.begin(), line.data.end()) + 12 * m1.bandwidth();
  const int steps = 200000;
  const double dx = (hi - lo) / steps;
  double integral = 0.0;
  for (int i = 0; i < steps; ++i) {
    double x = lo + (i + 0.5) * dx;
    integral += kde_at(m1, std::span<const double>(&x, 1)) * dx;
  }
  CHECK(std::abs(integral - 1.0) <= 1e-3);
}

TEST_CASE("mean shift") {
  Points one(1, 2);
  one.data = {-55, -65};
  KdeModel single(one, 1.5);
  auto r = mean_shift(single, one.row(0), 1e-6, 100);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.mode == std::vector<double>{-55, -65});

  const double h = 2.0;
  Points pair(2, 1);
  pair.data = {-0.1 * h, 0.1 * h};
  KdeModel m(pair, h);
  // Grid search for the density maximum.
  double best_x = 0, best_f = -1;
  for (int i = -2000; i <= 2000; ++i) {
    double x = i * 1e-4;
    double f = kde_at(m, std::span<const double>(&x, 1));
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
  }
  CHECK(std::abs(best_x) < 1e-4);
  for (std::size_t s = 0; s < 2; ++s) {
    auto out = mean_shift(m, pair.row(s), 1e-9, 10000);
    CHECK(out.converged);
    CHECK(std::abs(out.mode[0] - best_x) < 1e-3 * h);
  }

  CHECK_THROWS_AS(mean_shift(m, pair.row(0), 0.0, 10), Error);
  auto capped = mean_shift(m, pair.row(0), 1e-300, 3);
  CHECK_FALSE(capped.converged);
  CHECK(capped.iterations == 3);
}

TEST_CASE("mean shift never descends") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    Points p = random_points(60, 1 + t % 6, rng, 6.0);
    KdeModel model(p, select_bandwidth(p));
    std::vector<double> x(p.row(t % p.n).begin(), p.row(t % p.n).end());
    double prev = kde_at(model, x);
    for (int step = 0; step < 50; ++step) {
      auto out = mean_shift(model, x, 1e-12, 1);
      double f = kde_at(model, out.mode);
      CHECK(f >= prev * (1 - 1e-12));
      prev = f;
      x = out.mode;
    }
    CHECK(mean_shift(model, p.row(0), 1e-6, 500).ascent_violations == 0);
  }
}

TEST_CASE("cluster: single point is clutter") {
  Points one(1, 4);
  one.data = {-60, -70, -80, -90};
  auto r = cluster(one, {});
  CHECK(r.k == 0);
  CHECK(r.labels == std::vector<int>{kClutter});
  CHECK(r.degenerate);
  check_result_invariants(r);

  auto none = cluster(Points(0, 3), {});
  CHECK(none.k == 0);
  CHECK(none.labels.empty());
}

TEST_CASE("cluster: two planted groups and two isolated vectors") {
  std::mt19937_64 rng(9);
  Points p = planted_groups(rng);
  // Pairwise check of the construction: groups are tight and far apart, the
  // isolated vectors are far from everything.
  auto dist = [&](std::size_t i, std::size_t j) { return std::sqrt(kernels::squared_distance(p.row(i), p.row(j))); };
  for (std::size_t i = 0; i < 42; ++i)
    for (std::size_t j = i + 1; j < 42; ++j) {
      const bool same = (i < 20 && j < 20) || (i >= 20 && i < 40 && j >= 20 && j < 40);
      if (same)
        CHECK(dist(i, j) < 0.2);
      else
        CHECK(dist(i, j) > 30.0);
    }

  for (auto rule : {ThresholdRule::Mean, ThresholdRule::GeometricMean}) {
    for (auto ex : {Extraction::MeanShift, Extraction::ConnectedComponents}) {
      ClusteringConfig cfg;
      cfg.threshold_rule = rule;
      cfg.extraction = ex;
      auto r = cluster(p, {}, cfg);
      CHECK(r.k == 2);
      CHECK(r.labels[40] == kClutter);
      CHECK(r.labels[41] == kClutter);
      for (std::size_t i = 0; i < 20; ++i) {
        CHECK(r.labels[i] == 1);  // equal sizes: the group holding id 0 comes first
        CHECK(r.labels[20 + i] == 2);
      }
      check_result_invariants(r);
    }
  }
}

TEST_CASE("cluster: label numbering by size") {
  std::mt19937_64 rng(2);
  Points p = planted_groups(rng);
  // Drop two members of the first group so the second is larger.
  Points q(40, 3);
  for (std::size_t i = 2; i < 42; ++i) std::copy(p.row(i).begin(), p.row(i).end(), q.row(i - 2).begin());
  auto r = cluster(q, {});
  REQUIRE(r.k == 2);
  CHECK(r.labels[0] == 2);
  CHECK(r.labels[18] == 1);
}

TEST_CASE("cluster: affine invariance") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ub(-20, 20);
  for (int t = 0; t < 20; ++t) {
    Points p = random_points(50, 5, rng, 8.0);
    for (std::size_t i = 0; i < 15; ++i)
      for (std::size_t d = 0; d < 5; ++d) p.row(i)[d] = p.row(0)[d] + 0.3 * (i % 4);
    for (auto rule : {ThresholdRule::Mean, ThresholdRule::GeometricMean}) {
      ClusteringConfig cfg;
      cfg.threshold_rule = rule;
      auto base = cluster(p, {}, cfg);
      for (double a : {0.5, 2.0}) {
        std::vector<double> b(5);
        for (auto& v : b) v = ub(rng);
        Points q = p;
        for (std::size_t i = 0; i < q.n; ++i)
          for (std::size_t d = 0; d < 5; ++d) q.row(i)[d] = a * p.row(i)[d] + b[d];
        auto moved = cluster(q, {}, cfg);
        CHECK(moved.labels == base.labels);
        CHECK(moved.bandwidth == doctest::Approx(a * base.bandwidth).epsilon(1e-12));
        REQUIRE(moved.modes.size() == base.modes.size());
        for (std::size_t k = 0; k < base.modes.size(); ++k)
          for (std::size_t d = 0; d < 5; ++d)
            CHECK(std::abs(moved.modes[k][d] - (a * base.modes[k][d] + b[d])) < 1e-2 * a * base.bandwidth);
      }
    }
  }
}

TEST_CASE("cluster: permutation equivariance") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    Points p = random_points(40, 3, rng, 6.0);
    std::vector<int> ids(40);
    for (int i = 0; i < 40; ++i) ids[i] = 100 + i;
    auto base = cluster(p, ids);

    std::vector<std::size_t> perm(40);
    for (std::size_t i = 0; i < 40; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    Points q(40, 3);
    std::vector<int> qids(40);
    for (std::size_t i = 0; i < 40; ++i) {
      std::copy(p.row(perm[i]).begin(), p.row(perm[i]).end(), q.row(i).begin());
      qids[i] = ids[perm[i]];
    }
    auto moved = cluster(q, qids);
    CHECK(moved.k == base.k);
    for (std::size_t i = 0; i < 40; ++i) CHECK(moved.labels[i] == base.labels[perm[i]]);
    check_result_invariants(base);
  }
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  std::mt19937_64 rng(23);
  Points p = random_points(300, 11, rng, 7.0);
  const double h = select_bandwidth(p);
  auto s = kernels::serial::gaussian_sums(p, p, h);
  for (int threads : {2, 4, 8}) CHECK(same_bits(s, kernels::parallel::gaussian_sums(p, p, h, threads)));

  auto ms = kernels::serial::mean_shift_all(p, p, h, 1e-3 * h, 500);
  auto mp = kernels::parallel::mean_shift_all(p, p, h, 1e-3 * h, 500, 4);
  REQUIRE(ms.size() == mp.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    CHECK(same_bits(ms[i].mode, mp[i].mode));
    CHECK(ms[i].iterations == mp[i].iterations);
  }

  ClusteringConfig serial_cfg, par_cfg;
  par_cfg.threads = 4;
  auto a = cluster(p, {}, serial_cfg);
  auto b = cluster(p, {}, par_cfg);
  CHECK(a.labels == b.labels);
  CHECK(same_bits(a.density, b.density));
}

TEST_CASE("classification metrics") {
  GroundTruthScenario truth;
  ClusteringResult r;
  for (int i = 0; i < 15; ++i) {
    truth.ues.push_back({i, {}, 2.0});
    truth.true_label.push_back(i < 10 ? kClutter : 1);
    r.ue_ids.push_back(i);
    r.labels.push_back(i < 2 || i >= 10 ? 1 : kClutter);
  }
  auto m = classification_metrics(r, truth);
  REQUIRE(m.pfa.has_value());
  CHECK(*m.pfa == doctest::Approx(0.2));
  CHECK(*m.pd == 1.0);

  for (int i = 0; i < 15; ++i) r.labels[i] = truth.true_label[i];
  m = classification_metrics(r, truth);
  CHECK(*m.pfa == 0.0);
  CHECK(*m.pd == 1.0);

  GroundTruthScenario all_cluster = truth;
  std::fill(all_cluster.true_label.begin(), all_cluster.true_label.end(), 1);
  m = classification_metrics(r, all_cluster);
  CHECK_FALSE(m.pfa.has_value());
  CHECK(m.pd.has_value());

  ClusteringResult other = r;
  other.ue_ids[3] = 999;
  CHECK_THROWS_AS(classification_metrics(other, truth), Error);
  other.ue_ids.pop_back();
  other.labels.pop_back();
  CHECK_THROWS_AS(classification_metrics(other, truth), Error);
}
