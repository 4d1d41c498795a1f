#pragma once

// Rotation numbers of torus orbits and their rational/irrational classification.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "beltrami/core.hpp"
#include "beltrami/fieldline.hpp"

namespace beltrami {

struct Fraction {
  std::int64_t p = 0;
  std::int64_t q = 1;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
  friend bool operator==(const Fraction& a, const Fraction& b) { return a.p == b.p && a.q == b.q; }
  std::string to_string() const { return std::to_string(p) + "/" + std::to_string(q); }
};

/// Continued-fraction convergents of x up to and including the first one with q > q_max.
inline std::vector<Fraction> convergents(double x, std::int64_t q_max, int max_terms = 64) {
  if (!std::isfinite(x)) throw DomainError("convergents: non-finite input");
  std::vector<Fraction> out;
  std::int64_t h2 = 0, h1 = 1, k2 = 1, k1 = 0;
  double r = x;
  for (int n = 0; n < max_terms; ++n) {
    const double a = std::floor(r);
    if (std::abs(a) > 1e15) break;
    const auto ai = static_cast<std::int64_t>(a);
    const std::int64_t h = ai * h1 + h2;
    const std::int64_t k = ai * k1 + k2;
    out.push_back({h, k});
    if (k > q_max) break;
    const double frac = r - a;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
  }
  return out;
}

/// Brute force: the fraction p/q with 1 <= q <= q_max closest to x, smallest q on ties,
/// if it lies within `window` of x.
inline std::optional<Fraction> rational_match(double x, double window, std::int64_t q_max) {
  std::optional<Fraction> best;
  double best_d = window;
  for (std::int64_t q = 1; q <= q_max; ++q) {
    const auto p = static_cast<std::int64_t>(std::llround(x * static_cast<double>(q)));
    const double d = std::abs(x - static_cast<double>(p) / static_cast<double>(q));
    if (d <= window && (!best || d < best_d)) {
      best = Fraction{p, q};
      best_d = d;
    }
  }
  if (best) {  // reduce
    std::int64_t a = std::llabs(best->p), b = best->q;
    while (b) {
      const std::int64_t t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) best = Fraction{best->p / a, best->q / a};
  }
  return best;
}

enum class RotationVerdict { closed, irrational_like, undetermined };

inline const char* to_string(RotationVerdict v) {
  switch (v) {
    case RotationVerdict::closed: return "closed";
    case RotationVerdict::irrational_like: return "irrational-like";
    default: return "undetermined";
  }
}

struct RotationOptions {
  std::int64_t q_max = 50;
  /// The match window is window_factor / (total windings).
  double window_factor = 10.0;
  /// Below this many windings on the slower axis the verdict is undetermined.
  double min_windings = 10.0;
  /// Force the pair of axes (a, b); otherwise the two with the largest displacement.
  std::optional<std::array<int, 2>> axes;
};

struct RotationEstimate {
  int axis_a = 1;
  int axis_b = 2;
  double windings_a = 0.0;
  double windings_b = 0.0;
  double total_windings = 0.0;
  /// windings_a / windings_b.
  double estimate = 0.0;
  /// Width bound from the bounded deviation of the lift from a straight line.
  double uncertainty = 0.0;
  double window = 0.0;
  std::int64_t q_max = 50;
  RotationVerdict verdict = RotationVerdict::undetermined;
  std::optional<Fraction> match;
  std::vector<Fraction> convergents;
  std::string reason;
};

inline RotationEstimate rotation_number(const Trajectory& tr, const RotationOptions& opt = {}) {
  if (!tr.model.is_torus()) throw PreconditionError("rotation numbers need a torus trajectory");
  if (tr.size() < 2) throw PreconditionError("rotation_number: trajectory too short");
  const Vec3 L = tr.model.periods();
  const Vec3 u0 = tr.unwrapped(0);
  const Vec3 total = (tr.unwrapped(tr.size() - 1) - u0).cwiseQuotient(L);
  RotationEstimate r;
  r.q_max = opt.q_max;
  if (opt.axes) {
    r.axis_a = (*opt.axes)[0];
    r.axis_b = (*opt.axes)[1];
  } else {
    std::array<int, 3> idx{0, 1, 2};
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::abs(total[a]) > std::abs(total[b]); });
    r.axis_a = std::min(idx[0], idx[1]);
    r.axis_b = std::max(idx[0], idx[1]);
  }
  r.windings_a = total[r.axis_a];
  r.windings_b = total[r.axis_b];
  r.total_windings = std::abs(r.windings_a) + std::abs(r.windings_b);
  if (std::abs(r.windings_b) < opt.min_windings) {
    r.estimate = r.windings_b != 0.0 ? r.windings_a / r.windings_b : 0.0;
    r.reason = "fewer than " + std::to_string(static_cast<int>(opt.min_windings)) +
               " windings on the denominator axis";
    return r;
  }
  r.estimate = r.windings_a / r.windings_b;
  double dev = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const Vec3 d = (tr.unwrapped(i) - u0).cwiseQuotient(L);
    dev = std::max(dev, std::abs(d[r.axis_a] - r.estimate * d[r.axis_b]));
  }
  r.uncertainty = (2.0 * dev + 1e-9) / std::abs(r.windings_b);
  r.window = opt.window_factor / r.total_windings;
  r.convergents = convergents(r.estimate, opt.q_max);
  r.match = rational_match(r.estimate, r.window, opt.q_max);
  if (r.match) {
    r.verdict = RotationVerdict::closed;
    r.reason = "within " + std::to_string(r.window) + " of " + r.match->to_string();
    return r;
  }
  // Irrational-like: both ends of the uncertainty interval share all convergents with
  // q <= q_max and continue past q_max.
  const auto lo = convergents(r.estimate - r.uncertainty, opt.q_max);
  const auto hi = convergents(r.estimate + r.uncertainty, opt.q_max);
  auto prefix = [&](const std::vector<Fraction>& v) {
    std::vector<Fraction> out;
    for (const auto& f : v)
      if (f.q <= opt.q_max) out.push_back(f);
    return out;
  };
  const bool stable = !lo.empty() && !hi.empty() && prefix(lo) == prefix(hi) && lo.back().q > opt.q_max &&
                      hi.back().q > opt.q_max;
  if (stable && r.uncertainty < r.window) {
    r.verdict = RotationVerdict::irrational_like;
    r.reason = "no p/q with q <= " + std::to_string(opt.q_max) + " in the window; convergents stable";
  } else {
    r.reason = "no match, but convergents are not yet stable";
  }
  return r;
}

/// Orbits on one invariant torus share a rotation number. Seeds are grouped by their
/// first-integral level (within `level_tol`); a group is consistent when all of its
/// determined verdicts agree (same fraction, or overlapping irrational estimates).
struct VerdictGroup {
  double level = 0.0;
  std::vector<std::size_t> members;
  bool consistent = true;
};

inline std::vector<VerdictGroup> group_verdicts(const std::vector<double>& levels,
                                                const std::vector<RotationEstimate>& estimates,
                                                double level_tol = 1e-6) {
  if (levels.size() != estimates.size()) throw PreconditionError("group_verdicts: size mismatch");
  std::vector<VerdictGroup> groups;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const VerdictGroup& g) { return std::abs(g.level - levels[i]) <= level_tol; });
    if (it == groups.end()) {
      groups.push_back({levels[i], {}, true});
      it = groups.end() - 1;
    }
    it->members.push_back(i);
  }
  for (auto& g : groups) {
    const RotationEstimate* ref = nullptr;
    for (std::size_t i : g.members) {
      const RotationEstimate& e = estimates[i];
      if (e.verdict == RotationVerdict::undetermined) continue;
      if (!ref) {
        ref = &e;
        continue;
      }
      if (e.verdict != ref->verdict) {
        g.consistent = false;
      } else if (e.verdict == RotationVerdict::closed) {
        g.consistent = g.consistent && *e.match == *ref->match;
      } else {
        g.consistent = g.consistent && std::abs(e.estimate - ref->estimate) <= e.uncertainty + ref->uncertainty;
      }
    }
  }
  return groups;
}

}  // namespace beltrami
