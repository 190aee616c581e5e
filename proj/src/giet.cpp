#include "kdyn/giet.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace kdyn {

namespace {

void check_partition(const Interval& iv, std::vector<std::pair<Rational, Rational>> pieces, const char* what) {
  std::sort(pieces.begin(), pieces.end());
  Rational reach = iv.lo;
  for (const auto& [lo, hi] : pieces) {
    if (lo != reach) throw std::invalid_argument(std::string("GIET ") + what + " overlap or leave holes");
    reach = hi;
  }
  if (reach != iv.hi) throw std::invalid_argument(std::string("GIET ") + what + " do not reach the right end");
}

}  // namespace

Giet Giet::make(Interval interval, std::vector<GietBranch> branches, std::string name) {
  if (!(interval.lo < interval.hi)) throw std::invalid_argument("GIET interval must have a < b");
  if (branches.empty()) throw std::invalid_argument("GIET without branches");
  std::vector<std::pair<Rational, Rational>> src, img;
  for (const auto& b : branches) {
    if (!(b.lo < b.hi)) throw std::invalid_argument("GIET branch with empty source");
    if (!(b.slope > 0)) throw std::invalid_argument("GIET branches must be increasing");
    src.push_back({b.lo, b.hi});
    img.push_back({b(b.lo), b(b.hi)});
  }
  check_partition(interval, src, "sources");
  check_partition(interval, img, "images");
  std::sort(branches.begin(), branches.end(),
            [](const GietBranch& a, const GietBranch& b) { return a.lo < b.lo; });
  Giet g;
  g.interval_ = std::move(interval);
  g.branches_ = std::move(branches);
  g.name_ = std::move(name);
  return g;
}

Giet Giet::identity(Interval interval, std::string name) {
  GietBranch b{interval.lo, interval.hi, 1, 0};
  return make(std::move(interval), {b}, std::move(name));
}

Rational Giet::operator()(const Rational& x) const {
  for (const auto& b : branches_)
    if (b.lo <= x && x < b.hi) return b(x);
  throw std::invalid_argument("GIET evaluated outside [a, b): " + to_string(x));
}

Rational Giet::left_limit(const Rational& x) const {
  for (const auto& b : branches_)
    if (b.lo < x && x <= b.hi) return b(x);
  throw std::invalid_argument("GIET left limit outside (a, b]: " + to_string(x));
}

Giet Giet::inverse() const {
  std::vector<GietBranch> out;
  for (const auto& b : branches_) {
    Rational s = 1 / b.slope;
    out.push_back({b(b.lo), b(b.hi), s, -b.offset * s});
  }
  return make(interval_, std::move(out), inverse_name(name_));
}

bool Giet::is_iet() const {
  return std::all_of(branches_.begin(), branches_.end(), [](const GietBranch& b) { return b.slope == 1; });
}

std::vector<Rational> Giet::discontinuities() const {
  std::vector<Rational> out;
  for (std::size_t i = 0; i + 1 < branches_.size(); ++i) {
    const Rational& c = branches_[i].hi;
    if (branches_[i](c) != branches_[i + 1](c)) out.push_back(c);
  }
  return out;
}

namespace {

std::vector<Giet> with_inverses(const std::vector<Giet>& gens) {
  std::vector<Giet> all;
  for (const auto& g : gens) {
    all.push_back(g);
    all.push_back(g.inverse());
  }
  return all;
}

}  // namespace

DiscontinuityClosure discontinuity_closure(const std::vector<Giet>& gens, int L) {
  if (L < 0) throw std::invalid_argument("discontinuity_closure: L < 0");
  auto all = with_inverses(gens);
  std::set<Rational> seen;
  DiscontinuityClosure out;
  std::vector<Rational> frontier;
  auto add = [&](const Rational& x, std::vector<Rational>& into) {
    if (seen.insert(x).second) into.push_back(x);
  };
  {
    std::vector<Rational> d0;
    for (const auto& g : all)
      for (const auto& c : g.discontinuities()) d0.push_back(c);
    std::sort(d0.begin(), d0.end());
    for (const auto& c : d0) add(c, frontier);
  }
  out.discovery = frontier;
  for (int level = 0; level <= L; ++level) {
    std::vector<Rational> next;
    for (const auto& c : frontier)
      for (const auto& g : all) next.push_back(g(c));
    std::sort(next.begin(), next.end());
    std::vector<Rational> fresh;
    for (const auto& c : next) add(c, fresh);
    if (level == L) {
      out.defects = fresh;
      out.closed = fresh.empty();
      break;
    }
    out.discovery.insert(out.discovery.end(), fresh.begin(), fresh.end());
    frontier = std::move(fresh);
  }
  out.points = out.discovery;
  std::sort(out.points.begin(), out.points.end());
  return out;
}

Rational BlowUpResult::conjugate(const Rational& x) const {
  Rational y = x;
  for (const auto& p : blown)
    if (p.c <= x) y += p.alpha;
  return y;
}

Rational BlowUpResult::conjugate_left(const Rational& x) const {
  Rational y = x;
  for (const auto& p : blown)
    if (p.c < x) y += p.alpha;
  return y;
}

BlowUpResult blow_up(const std::vector<Giet>& gens, int L, const Rational& rho) {
  if (!(rho > 0 && rho < 1)) throw std::invalid_argument("blow_up: rho must lie in (0, 1)");
  if (gens.empty()) throw std::invalid_argument("blow_up: no generators");
  const Interval iv = gens.front().interval();
  for (const auto& g : gens)
    if (!(g.interval() == iv)) throw std::invalid_argument("blow_up: generators act on different intervals");

  auto closure = discontinuity_closure(gens, L);
  BlowUpResult out;
  out.discontinuities = closure.points;
  out.exact = closure.closed;
  out.defects = closure.defects;

  // only interior points open a bounded gap; ranks follow discovery order
  Rational width = iv.length();
  long rank = 0;
  for (const auto& c : closure.discovery) {
    if (!(iv.lo < c && c < iv.hi)) continue;
    out.blown.push_back({c, pow(rho, rank + 1) * width});
    ++rank;
  }
  std::sort(out.blown.begin(), out.blown.end(),
            [](const BlownPoint& a, const BlownPoint& b) { return a.c < b.c; });

  std::vector<Interval> comps;
  Rational left = iv.lo;
  for (const auto& p : out.blown) {
    comps.push_back({out.conjugate(left), out.conjugate_left(p.c)});
    left = p.c;
  }
  comps.push_back({out.conjugate(left), out.conjugate_left(iv.hi)});
  out.space = share(CompactSet::from_intervals(comps));
  if (!out.exact) return out;

  std::vector<Rational> cuts{iv.lo, iv.hi};
  for (const auto& p : out.blown) cuts.push_back(p.c);
  for (const auto& g : gens) {
    std::vector<Rational> pts = cuts;
    for (const auto& b : g.branches()) pts.push_back(b.lo);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Branch> bs;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const Rational &p = pts[i], &q = pts[i + 1];
      Rational shift_src = out.conjugate(p) - p;
      Rational gp = g(p);
      Rational shift_dst = out.conjugate(gp) - gp;
      const GietBranch* gb = nullptr;
      for (const auto& b : g.branches())
        if (b.lo <= p && p < b.hi) gb = &b;
      Rational slope = gb->slope;
      Rational offset = gb->offset + shift_dst - slope * shift_src;
      bs.push_back({{p + shift_src, q + shift_src}, slope, offset});
    }
    Word label;
    if (!g.name().empty()) label.push_back(g.name());
    out.induced.push_back(PAHomeo::make(out.space, std::move(bs), std::move(label)));
  }
  return out;
}

SidedOrbit one_sided_orbit(const std::vector<Giet>& gens, const Rational& x, Side side, int bound) {
  if (gens.empty()) throw std::invalid_argument("one_sided_orbit: no generators");
  const Interval iv = gens.front().interval();
  if (x < iv.lo || x > iv.hi) throw std::invalid_argument("one_sided_orbit: point outside [a, b]");
  if (x == iv.lo && side == Side::left) throw std::invalid_argument("no left limit at a");
  if (x == iv.hi && side == Side::right) throw std::invalid_argument("no right limit at b");
  if (bound < 0) throw std::invalid_argument("one_sided_orbit: bound < 0");

  auto all = with_inverses(gens);
  SidedOrbit out{x, side, {x}, false};
  std::set<Rational> seen{x};
  std::vector<Rational> frontier{x};
  bool grew = true;
  for (int level = 1; level <= bound; ++level) {
    std::vector<Rational> next;
    for (const auto& y : frontier)
      for (const auto& g : all) {
        Rational z = side == Side::left ? g.left_limit(y) : g.right_limit(y);
        if (seen.insert(z).second) next.push_back(z);
      }
    grew = !next.empty();
    out.points.insert(out.points.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  out.closed = bound >= 1 && !grew;
  return out;
}

}  // namespace kdyn
