#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hypodiff/types.hpp"

namespace hypodiff {

/// Gaussian kernel density estimate sum_p phi_d(W (xi - X_p)) |det W| / n_total
/// with a fixed whitening matrix W. The normalisation uses n_total (not the
/// number of samples), giving a defective density when samples were removed.
struct KdeResult {
  std::vector<double> values;
  std::vector<double> std_errors;  // sample sd of per-path contributions / sqrt(n_total)
};

/// Contributions beyond `cutoff` whitened units in the first coordinate are
/// skipped. Deterministic: every node sums samples in a fixed order.
KdeResult gaussian_kde(std::span<const Vector> samples, std::size_t n_total,
                       std::span<const Vector> nodes, const Matrix& W, unsigned threads = 0,
                       double cutoff = 8.0);

}  // namespace hypodiff
