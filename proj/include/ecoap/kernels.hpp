#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ecoap {

/// n points in `dim` dimensions, row-major.
struct Points {
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<double> data;

  Points() = default;
  Points(std::size_t count, std::size_t dimension) : n(count), dim(dimension), data(count * dimension, 0.0) {}

  std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * dim, dim}; }
};

struct MeanShiftOutcome {
  std::vector<double> mode;
  int iterations = 0;
  bool converged = false;
  // Steps where the unnormalized density fell by more than 1e-12 relative.
  int ascent_violations = 0;
};

namespace kernels {

double squared_distance(std::span<const double> a, std::span<const double> b);

/// sum_i exp(-|x - x_i|^2 / (2 h^2)), accumulated in point order.
double gaussian_sum(const Points& pts, std::span<const double> x, double h);

/// Gaussian mean-shift from `start`; the unnormalized density at each
/// iterate is tracked to count ascent violations.
MeanShiftOutcome mean_shift(const Points& pts, std::span<const double> start, double h, double tol, int max_iter);

// Serial reference versions. The parallel versions split the outer loop only,
// so each element is computed by the identical instruction sequence and the
// results match the serial ones bit for bit.
namespace serial {
std::vector<double> gaussian_sums(const Points& pts, const Points& queries, double h);
std::vector<MeanShiftOutcome> mean_shift_all(const Points& pts, const Points& starts, double h, double tol,
                                             int max_iter);
}  // namespace serial

namespace parallel {
/// `threads` <= 0 uses the OpenMP default.
std::vector<double> gaussian_sums(const Points& pts, const Points& queries, double h, int threads = 0);
std::vector<MeanShiftOutcome> mean_shift_all(const Points& pts, const Points& starts, double h, double tol,
                                             int max_iter, int threads = 0);
}  // namespace parallel

}  // namespace kernels
}  // namespace ecoap
