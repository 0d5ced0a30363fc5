#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hypodiff/types.hpp"

namespace hypodiff {

/// Block decomposition (p_0, ..., p_r) of the drift matrix. Coordinate i in
/// block j carries dilation exponent 2j+1.
class BlockStructure {
 public:
  /// Single block of size 1.
  BlockStructure() : sizes_{1}, offsets_{1} {}

  /// Validates p_0 >= p_1 >= ... >= p_r >= 1.
  static BlockStructure from_sizes(std::vector<int> sizes);

  int r() const noexcept { return static_cast<int>(sizes_.size()) - 1; }
  int d() const noexcept { return offsets_.back(); }
  int p0() const noexcept { return sizes_.front(); }

  const std::vector<int>& sizes() const noexcept { return sizes_; }
  /// offsets()[j] = p_0 + ... + p_j; offsets()[r] = d.
  const std::vector<int>& offsets() const noexcept { return offsets_; }

  /// First coordinate of block j (0-based).
  int block_begin(int j) const noexcept { return j == 0 ? 0 : offsets_[j - 1]; }
  int block_of(int i) const;
  int exponent(int i) const { return 2 * block_of(i) + 1; }

  friend bool operator==(const BlockStructure&, const BlockStructure&) = default;

 private:
  BlockStructure(std::vector<int> sizes, std::vector<int> offsets)
      : sizes_(std::move(sizes)), offsets_(std::move(offsets)) {}

  std::vector<int> sizes_;
  std::vector<int> offsets_;
};

/// Multi-index beta in N_0^d.
struct MultiIndex {
  std::vector<int> exponents;

  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> e) : exponents(std::move(e)) {}
  static MultiIndex zero(int d) { return MultiIndex(std::vector<int>(d, 0)); }
  static MultiIndex unit(int d, int i);

  int size() const noexcept { return static_cast<int>(exponents.size()); }
  int order() const noexcept;
  /// beta! = prod beta_i!
  double factorial() const;

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b);
  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
};

/// Singular values above rel_tol times the largest.
int numerical_rank(const Matrix& m, double rel_tol = 1e-10);

/// Checks B against the block form given by `sizes`: all blocks strictly below
/// the subdiagonal vanish (|entry| <= 1e-12) and each subdiagonal block B_j
/// has full rank p_j.
BlockStructure validate_block_form(const Matrix& B, std::span<const int> sizes);

/// Rank of [E | BE | ... | B^{d-1}E] with E the first p0 canonical columns.
/// The Hormander condition holds iff the result equals d.
int kalman_rank(const Matrix& B, int p0);

Vector dilation(double lambda, const Vector& x, const BlockStructure& s);

/// |x|_B = sum_j sum_{i in block j} |x_i|^{1/(2j+1)}; 1-homogeneous under dilation().
double quasi_norm(const Vector& x, const BlockStructure& s);

/// [beta]_B = sum_j sum_{i in block j} (2j+1) beta_i.
int multi_index_height(const MultiIndex& beta, const BlockStructure& s);

/// |T-t|^{1/2} + |y - e^{(T-t)B} x|_B. Negative T-t is allowed.
double intrinsic_distance(double t, const Vector& x, double T, const Vector& y, const Matrix& B,
                          const BlockStructure& s);

/// All pairs (k, beta) with 2k + [beta]_B <= n, ordered by (k, beta).
std::vector<std::pair<int, MultiIndex>> admissible_pairs(int n, const BlockStructure& s);

}  // namespace hypodiff
