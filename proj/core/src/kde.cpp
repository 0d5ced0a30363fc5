#include "hypodiff/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "hypodiff/error.hpp"
#include "hypodiff/parallel.hpp"

namespace hypodiff {

KdeResult gaussian_kde(std::span<const Vector> samples, std::size_t n_total,
                       std::span<const Vector> nodes, const Matrix& W, unsigned threads,
                       double cutoff) {
  require(!nodes.empty(), ErrorKind::EmptyGrid, "evaluation grid is empty");
  require(n_total >= 2 && samples.size() <= n_total, ErrorKind::InvalidArgument,
          "n_total must be >= 2 and >= the number of samples");
  const Eigen::Index d = W.rows();
  require(W.cols() == d, ErrorKind::DimensionMismatch, "whitening matrix must be square");
  const double det = std::abs(W.determinant());
  require(det > 0.0 && std::isfinite(det), ErrorKind::InvalidArgument,
          "whitening matrix must be invertible");

  // Whitened samples, ordered by first coordinate (ties by path order).
  const std::size_t n = samples.size();
  std::vector<Vector> y(n);
  for (std::size_t p = 0; p < n; ++p) {
    require(samples[p].size() == d, ErrorKind::DimensionMismatch, "sample has wrong dimension");
    y[p] = W * samples[p];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return y[a](0) < y[b](0); });
  std::vector<double> flat(n * d);
  std::vector<double> first(n);
  for (std::size_t k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < d; ++i) flat[k * d + i] = y[order[k]](i);
    first[k] = flat[k * d];
  }

  const double norm = det / std::pow(2.0 * std::numbers::pi, 0.5 * static_cast<double>(d));
  const double N = static_cast<double>(n_total);
  KdeResult out;
  out.values.assign(nodes.size(), 0.0);
  out.std_errors.assign(nodes.size(), 0.0);
  parallel_for(
      nodes.size(), resolve_threads(threads),
      [&](std::size_t begin, std::size_t end) {
        Vector z(d);
        for (std::size_t k = begin; k < end; ++k) {
          require(nodes[k].size() == d, ErrorKind::DimensionMismatch,
                  "grid node has wrong dimension");
          z = W * nodes[k];
          const auto lo = std::lower_bound(first.begin(), first.end(), z(0) - cutoff);
          const auto hi = std::upper_bound(first.begin(), first.end(), z(0) + cutoff);
          double s1 = 0.0, s2 = 0.0;
          for (auto it = lo; it != hi; ++it) {
            const std::size_t q = static_cast<std::size_t>(it - first.begin());
            double r2 = 0.0;
            for (Eigen::Index i = 0; i < d; ++i) {
              const double u = z(i) - flat[q * d + i];
              r2 += u * u;
            }
            if (r2 > cutoff * cutoff) continue;
            const double kval = norm * std::exp(-0.5 * r2);
            s1 += kval;
            s2 += kval * kval;
          }
          const double mean = s1 / N;
          const double var = std::max(0.0, (s2 / N - mean * mean) * N / (N - 1.0));
          out.values[k] = mean;
          out.std_errors[k] = std::sqrt(var / N);
        }
      },
      4);
  return out;
}

}  // namespace hypodiff
