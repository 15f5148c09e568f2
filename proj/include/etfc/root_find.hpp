#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "etfc/errors.hpp"

namespace etfc {

/// Numerical knobs shared by the trigger search and the tension guard.
struct Tolerances {
  double tol_root = 1e-9;  // bisection bracket width
  double h_scan = 1e-3;    // forward scan step
  double guard = 1e-9;     // relative margin guard for tension evaluations
};

/// Smallest crossing of phi from <= 0 to > 0 in (from, horizon].
///
/// Scans forward in steps of h_scan until phi turns positive, then bisects the
/// bracket down to tol_root. Returns the left end of the final bracket, so
/// phi(result) <= 0 and the true crossing lies within tol_root after it.
/// Returns `from` if phi(from) is already positive and nullopt if phi stays
/// nonpositive up to the horizon.
template <class Phi>
std::optional<double> first_crossing(Phi&& phi, double from, double horizon,
                                     const Tolerances& tol) {
  auto eval = [&](double t) {
    const double v = phi(t);
    if (std::isnan(v))
      throw RootFindingFault("trigger function is NaN at t=" + std::to_string(t));
    return v;
  };

  if (eval(from) > 0.0) return from;
  double lo = from;
  while (lo < horizon) {
    const double hi = std::min(lo + tol.h_scan, horizon);
    if (eval(hi) > 0.0) {
      double a = lo;
      double b = hi;
      while (b - a > tol.tol_root) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;  // bracket at double resolution
        if (eval(mid) > 0.0)
          b = mid;
        else
          a = mid;
      }
      return a;
    }
    lo = hi;
  }
  return std::nullopt;
}

}  // namespace etfc
