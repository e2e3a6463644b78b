#pragma once

#include <cmath>

#include "dvdp/errors.hpp"

namespace dvdp {

// x'' - x + x^3 = eps [ (p1 + p2 x - x^2) x' + p3 sin(p4 t) ]
struct Params {
  double eps = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double p4 = 1.0;

  void validate() const {
    if (!std::isfinite(eps) || !std::isfinite(p1) || !std::isfinite(p2) || !std::isfinite(p3) ||
        !std::isfinite(p4))
      throw DomainError("non-finite parameter");
    if (eps < 0.0) throw DomainError("eps must be non-negative");
  }
};

// Right loop <-> x > 0 <-> the "+" branch of the loop formulas.
enum class LoopSide { RIGHT, LEFT };

inline int sign_of(LoopSide s) { return s == LoopSide::RIGHT ? 1 : -1; }
inline const char* to_string(LoopSide s) { return s == LoopSide::RIGHT ? "right" : "left"; }

}  // namespace dvdp
