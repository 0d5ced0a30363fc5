#pragma once

#include <string>

namespace hypodiff {

/// printf "%.17g": round-trip decimal text used by every CSV writer.
std::string format_double(double v);

}  // namespace hypodiff
