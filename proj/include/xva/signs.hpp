#pragma once

#include <algorithm>

namespace xva {

// X+ = max(X,0) and X- = min(X,0), so that X == pos(X) + neg(X).
constexpr double pos(double x) noexcept { return std::max(x, 0.0); }
constexpr double neg(double x) noexcept { return std::min(x, 0.0); }

}  // namespace xva
