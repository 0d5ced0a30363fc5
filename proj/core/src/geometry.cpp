#include "hypodiff/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/SVD>

#include "hypodiff/error.hpp"
#include "hypodiff/matrix_exponential.hpp"

namespace hypodiff {
namespace {

constexpr double kZeroPatternTol = 1e-12;
constexpr double kRankTol = 1e-10;

void enumerate_betas(const BlockStructure& s, int budget, int coord, std::vector<int>& current,
                     std::vector<MultiIndex>& out) {
  if (coord == s.d()) {
    out.emplace_back(current);
    return;
  }
  const int w = s.exponent(coord);
  for (int e = 0; e * w <= budget; ++e) {
    current[coord] = e;
    enumerate_betas(s, budget - e * w, coord + 1, current, out);
  }
  current[coord] = 0;
}

}  // namespace

BlockStructure BlockStructure::from_sizes(std::vector<int> sizes) {
  require(!sizes.empty(), ErrorKind::InvalidArgument, "block sizes must be non-empty");
  for (std::size_t j = 0; j < sizes.size(); ++j) {
    require(sizes[j] >= 1, ErrorKind::InvalidArgument, "block sizes must be >= 1");
    if (j > 0 && sizes[j] > sizes[j - 1]) {
      fail(ErrorKind::NonMonotoneSizes, "p_" + std::to_string(j) + " = " + std::to_string(sizes[j]) +
                                            " exceeds p_" + std::to_string(j - 1) + " = " +
                                            std::to_string(sizes[j - 1]));
    }
  }
  std::vector<int> offsets(sizes.size());
  std::partial_sum(sizes.begin(), sizes.end(), offsets.begin());
  return BlockStructure(std::move(sizes), std::move(offsets));
}

int BlockStructure::block_of(int i) const {
  require(i >= 0 && i < d(), ErrorKind::InvalidArgument, "coordinate index out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), i);
  return static_cast<int>(it - offsets_.begin());
}

MultiIndex MultiIndex::unit(int d, int i) {
  MultiIndex m = zero(d);
  m.exponents.at(i) = 1;
  return m;
}

int MultiIndex::order() const noexcept {
  return std::accumulate(exponents.begin(), exponents.end(), 0);
}

double MultiIndex::factorial() const {
  double f = 1.0;
  for (int e : exponents) f *= std::tgamma(e + 1.0);
  return f;
}

MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
  require(a.size() == b.size(), ErrorKind::DimensionMismatch, "multi-index lengths differ");
  MultiIndex c = a;
  for (int i = 0; i < a.size(); ++i) c.exponents[i] += b.exponents[i];
  return c;
}

int numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  const Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cut = rel_tol * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  return rank;
}

BlockStructure validate_block_form(const Matrix& B, std::span<const int> sizes) {
  require(B.rows() == B.cols(), ErrorKind::DimensionMismatch, "B must be square");
  const int total = std::accumulate(sizes.begin(), sizes.end(), 0);
  require(total == B.rows(), ErrorKind::DimensionMismatch,
          "block sizes sum to " + std::to_string(total) + " but B is " + std::to_string(B.rows()) +
              "x" + std::to_string(B.cols()));
  BlockStructure s = BlockStructure::from_sizes(std::vector<int>(sizes.begin(), sizes.end()));

  const int blocks = s.r() + 1;
  for (int row_block = 2; row_block < blocks; ++row_block) {
    for (int col_block = 0; col_block + 1 < row_block; ++col_block) {
      const auto blk = B.block(s.block_begin(row_block), s.block_begin(col_block),
                               s.sizes()[row_block], s.sizes()[col_block]);
      if (blk.cwiseAbs().maxCoeff() > kZeroPatternTol) {
        fail(ErrorKind::ZeroPatternViolation, "nonzero entry in block (" + std::to_string(row_block) +
                                                  "," + std::to_string(col_block) + ")");
      }
    }
  }
  for (int j = 1; j < blocks; ++j) {
    const Matrix Bj =
        B.block(s.block_begin(j), s.block_begin(j - 1), s.sizes()[j], s.sizes()[j - 1]);
    if (numerical_rank(Bj, kRankTol) != s.sizes()[j]) {
      fail(ErrorKind::RankDeficientSubdiagonal,
           "B_" + std::to_string(j) + " does not have rank " + std::to_string(s.sizes()[j]));
    }
  }
  return s;
}

int kalman_rank(const Matrix& B, int p0) {
  require(B.rows() == B.cols(), ErrorKind::DimensionMismatch, "B must be square");
  const int d = static_cast<int>(B.rows());
  require(p0 >= 1 && p0 <= d, ErrorKind::DimensionMismatch, "p0 must lie in [1, d]");
  Matrix ctrl(d, d * p0);
  Matrix power = Matrix::Identity(d, d).leftCols(p0);
  for (int k = 0; k < d; ++k) {
    ctrl.middleCols(k * p0, p0) = power;
    power = B * power;
  }
  return numerical_rank(ctrl, kRankTol);
}

Vector dilation(double lambda, const Vector& x, const BlockStructure& s) {
  require(lambda > 0.0, ErrorKind::NonPositiveLambda, "dilation requires lambda > 0");
  require(x.size() == s.d(), ErrorKind::DimensionMismatch, "vector length differs from d");
  Vector y = x;
  for (int j = 0; j <= s.r(); ++j) {
    const double scale = std::pow(lambda, 2 * j + 1);
    y.segment(s.block_begin(j), s.sizes()[j]) *= scale;
  }
  return y;
}

double quasi_norm(const Vector& x, const BlockStructure& s) {
  require(x.size() == s.d(), ErrorKind::DimensionMismatch, "vector length differs from d");
  double norm = 0.0;
  for (int j = 0; j <= s.r(); ++j) {
    const double p = 1.0 / (2 * j + 1);
    for (int i = s.block_begin(j); i < s.offsets()[j]; ++i) {
      const double a = std::abs(x(i));
      norm += (j == 0) ? a : (j == 1 ? std::cbrt(a) : std::pow(a, p));
    }
  }
  return norm;
}

int multi_index_height(const MultiIndex& beta, const BlockStructure& s) {
  require(beta.size() == s.d(), ErrorKind::DimensionMismatch, "multi-index length differs from d");
  int h = 0;
  for (int i = 0; i < s.d(); ++i) h += s.exponent(i) * beta.exponents[i];
  return h;
}

double intrinsic_distance(double t, const Vector& x, double T, const Vector& y, const Matrix& B,
                          const BlockStructure& s) {
  const double dt = T - t;
  const Vector z = y - mat_exp(B, dt) * x;
  return std::sqrt(std::abs(dt)) + quasi_norm(z, s);
}

std::vector<std::pair<int, MultiIndex>> admissible_pairs(int n, const BlockStructure& s) {
  require(n >= 0, ErrorKind::InvalidArgument, "order must be nonnegative");
  std::vector<std::pair<int, MultiIndex>> pairs;
  std::vector<int> scratch(s.d(), 0);
  for (int k = 0; 2 * k <= n; ++k) {
    std::vector<MultiIndex> betas;
    enumerate_betas(s, n - 2 * k, 0, scratch, betas);
    std::sort(betas.begin(), betas.end());
    for (auto& b : betas) pairs.emplace_back(k, std::move(b));
  }
  return pairs;
}

}  // namespace hypodiff
