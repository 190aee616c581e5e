#pragma once

#include "kdyn/maps.hpp"

#include <string>
#include <vector>

namespace kdyn {

// Increasing affine piece on the half-open source [lo, hi).
struct GietBranch {
  Rational lo, hi;
  Rational slope, offset;

  Rational operator()(const Rational& x) const { return slope * x + offset; }
  bool operator==(const GietBranch& o) const = default;
};

class Giet {
 public:
  static Giet make(Interval interval, std::vector<GietBranch> branches, std::string name = {});
  static Giet identity(Interval interval, std::string name = {});

  const Interval& interval() const { return interval_; }
  const std::vector<GietBranch>& branches() const { return branches_; }
  const std::string& name() const { return name_; }

  Rational operator()(const Rational& x) const;  // x in [a, b)
  Rational left_limit(const Rational& x) const;  // g(x⁻), x in (a, b]
  Rational right_limit(const Rational& x) const { return (*this)(x); }

  Giet inverse() const;
  bool is_iet() const;
  // Interior points where the one-sided limits differ.
  std::vector<Rational> discontinuities() const;

 private:
  Interval interval_;
  std::vector<GietBranch> branches_;
  std::string name_;
};

struct DiscontinuityClosure {
  std::vector<Rational> points;  // sorted
  std::vector<Rational> discovery;  // same points in discovery order
  bool closed = false;
  std::vector<Rational> defects;  // points one more step would add
};

DiscontinuityClosure discontinuity_closure(const std::vector<Giet>& gens, int L);

struct BlownPoint {
  Rational c;
  Rational alpha;
};

struct BlowUpResult {
  Space space;
  std::vector<PAHomeo> induced;  // empty unless exact
  std::vector<BlownPoint> blown;  // sorted by c
  std::vector<Rational> discontinuities;
  bool exact = false;
  std::vector<Rational> defects;

  // f(x) = x + sum of alpha_c over c <= x, and its left limit f(x⁻).
  Rational conjugate(const Rational& x) const;
  Rational conjugate_left(const Rational& x) const;
};

BlowUpResult blow_up(const std::vector<Giet>& gens, int L, const Rational& rho);

enum class Side { left, right };

struct SidedOrbit {
  Rational base;
  Side side;
  std::vector<Rational> points;  // discovery order
  bool closed = false;
};

SidedOrbit one_sided_orbit(const std::vector<Giet>& gens, const Rational& x, Side side, int bound);

}  // namespace kdyn
