#include "ecoap/kernels.hpp"

#include <cmath>

#include <omp.h>

namespace ecoap::kernels {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

double gaussian_sum(const Points& pts, std::span<const double> x, double h) {
  const double inv = 1.0 / (2.0 * h * h);
  double s = 0.0;
  for (std::size_t i = 0; i < pts.n; ++i) s += std::exp(-squared_distance(x, pts.row(i)) * inv);
  return s;
}

MeanShiftOutcome mean_shift(const Points& pts, std::span<const double> start, double h, double tol, int max_iter) {
  MeanShiftOutcome out;
  out.mode.assign(start.begin(), start.end());
  std::vector<double> next(pts.dim);
  const double inv = 1.0 / (2.0 * h * h);
  double prev_sum = -1.0;

  for (int it = 0; it < max_iter; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    double wsum = 0.0;
    for (std::size_t i = 0; i < pts.n; ++i) {
      const auto xi = pts.row(i);
      const double w = std::exp(-squared_distance(out.mode, xi) * inv);
      wsum += w;
      for (std::size_t d = 0; d < pts.dim; ++d) next[d] += w * xi[d];
    }
    if (!(wsum > 0.0)) break;  // underflow far from every point: no direction
    if (prev_sum >= 0.0 && wsum < prev_sum * (1.0 - 1e-12)) ++out.ascent_violations;
    prev_sum = wsum;

    double step2 = 0.0;
    for (std::size_t d = 0; d < pts.dim; ++d) {
      next[d] /= wsum;
      const double diff = next[d] - out.mode[d];
      step2 += diff * diff;
    }
    out.mode.swap(next);
    out.iterations = it + 1;
    if (std::sqrt(step2) < tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

namespace serial {

std::vector<double> gaussian_sums(const Points& pts, const Points& queries, double h) {
  std::vector<double> out(queries.n);
  for (std::size_t q = 0; q < queries.n; ++q) out[q] = gaussian_sum(pts, queries.row(q), h);
  return out;
}

std::vector<MeanShiftOutcome> mean_shift_all(const Points& pts, const Points& starts, double h, double tol,
                                             int max_iter) {
  std::vector<MeanShiftOutcome> out(starts.n);
  for (std::size_t s = 0; s < starts.n; ++s) out[s] = mean_shift(pts, starts.row(s), h, tol, max_iter);
  return out;
}

}  // namespace serial

namespace parallel {

namespace {
int resolve(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }
}  // namespace

std::vector<double> gaussian_sums(const Points& pts, const Points& queries, double h, int threads) {
  std::vector<double> out(queries.n);
  const auto nq = static_cast<std::ptrdiff_t>(queries.n);
#pragma omp parallel for schedule(static) num_threads(resolve(threads))
  for (std::ptrdiff_t q = 0; q < nq; ++q)
    out[static_cast<std::size_t>(q)] = gaussian_sum(pts, queries.row(static_cast<std::size_t>(q)), h);
  return out;
}

std::vector<MeanShiftOutcome> mean_shift_all(const Points& pts, const Points& starts, double h, double tol,
                                             int max_iter, int threads) {
  std::vector<MeanShiftOutcome> out(starts.n);
  const auto ns = static_cast<std::ptrdiff_t>(starts.n);
#pragma omp parallel for schedule(dynamic) num_threads(resolve(threads))
  for (std::ptrdiff_t s = 0; s < ns; ++s) {
    const auto i = static_cast<std::size_t>(s);
    out[i] = mean_shift(pts, starts.row(i), h, tol, max_iter);
  }
  return out;
}

}  // namespace parallel
}  // namespace ecoap::kernels
