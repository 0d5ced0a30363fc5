#include "hypodiff/matrix_exponential.hpp"

#include <cmath>

namespace hypodiff {
namespace {

constexpr int kTaylorDegree = 18;

}  // namespace

bool is_nilpotent(const Matrix& B) {
  const int d = static_cast<int>(B.rows());
  if (d == 0) return true;
  const double scale = B.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  Matrix power = B / scale;
  for (int k = 1; k < d; ++k) power = power * (B / scale);
  return power.cwiseAbs().maxCoeff() <= 1e-14;
}

Matrix mat_exp(const Matrix& B, double t) {
  const int d = static_cast<int>(B.rows());
  const Matrix A = t * B;
  if (is_nilpotent(B)) {
    // The series terminates after d terms.
    Matrix result = Matrix::Identity(d, d);
    Matrix term = Matrix::Identity(d, d);
    for (int k = 1; k < d; ++k) {
      term = term * A / static_cast<double>(k);
      result += term;
    }
    return result;
  }

  const double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix scaled = A / std::ldexp(1.0, squarings);

  // Horner evaluation of sum_{k<=18} scaled^k / k!.
  Matrix result = Matrix::Identity(d, d);
  for (int k = kTaylorDegree; k >= 1; --k) {
    result = Matrix::Identity(d, d) + scaled * result / static_cast<double>(k);
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace hypodiff
