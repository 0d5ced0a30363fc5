#pragma once

#include "hypodiff/types.hpp"

namespace hypodiff {

/// True when B^d vanishes (relative to |B|^d).
bool is_nilpotent(const Matrix& B);

/// e^{tB}. Nilpotent B uses the terminating series; otherwise scaling and
/// squaring of a degree-18 Taylor polynomial.
Matrix mat_exp(const Matrix& B, double t);

}  // namespace hypodiff
