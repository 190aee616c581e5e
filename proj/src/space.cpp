#include "kdyn/space.hpp"

#include <algorithm>
#include <stdexcept>

namespace kdyn {

bool Span::empty() const {
  if (lo < hi) return false;
  if (lo == hi) return !(lo_closed && hi_closed);
  return true;
}

bool Span::contains(const Rational& x) const {
  bool above = lo_closed ? lo <= x : lo < x;
  bool below = hi_closed ? x <= hi : x < hi;
  return above && below;
}

Span intersect(const Span& a, const Span& b) {
  Span r;
  if (a.lo > b.lo) {
    r.lo = a.lo, r.lo_closed = a.lo_closed;
  } else if (b.lo > a.lo) {
    r.lo = b.lo, r.lo_closed = b.lo_closed;
  } else {
    r.lo = a.lo, r.lo_closed = a.lo_closed && b.lo_closed;
  }
  if (a.hi < b.hi) {
    r.hi = a.hi, r.hi_closed = a.hi_closed;
  } else if (b.hi < a.hi) {
    r.hi = b.hi, r.hi_closed = b.hi_closed;
  } else {
    r.hi = a.hi, r.hi_closed = a.hi_closed && b.hi_closed;
  }
  return r;
}

Span affine_image(const Span& s, const Rational& slope, const Rational& offset) {
  Rational a = slope * s.lo + offset, b = slope * s.hi + offset;
  if (slope > 0) return {a, b, s.lo_closed, s.hi_closed};
  return {b, a, s.hi_closed, s.lo_closed};
}

SpanUnion::SpanUnion(std::vector<Span> spans) {
  std::erase_if(spans, [](const Span& s) { return s.empty(); });
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    if (a.lo != b.lo) return a.lo < b.lo;
    return a.lo_closed && !b.lo_closed;
  });
  for (auto& s : spans) {
    if (!spans_.empty()) {
      Span& cur = spans_.back();
      bool joins = s.lo < cur.hi || (s.lo == cur.hi && (s.lo_closed || cur.hi_closed));
      if (joins) {
        if (s.lo == cur.lo) cur.lo_closed = cur.lo_closed || s.lo_closed;
        if (s.hi > cur.hi) {
          cur.hi = s.hi, cur.hi_closed = s.hi_closed;
        } else if (s.hi == cur.hi) {
          cur.hi_closed = cur.hi_closed || s.hi_closed;
        }
        continue;
      }
    }
    spans_.push_back(s);
  }
}

bool SpanUnion::contains(const Rational& x) const {
  return std::any_of(spans_.begin(), spans_.end(), [&](const Span& s) { return s.contains(x); });
}

SpanUnion SpanUnion::unite(const SpanUnion& o) const {
  std::vector<Span> all = spans_;
  all.insert(all.end(), o.spans_.begin(), o.spans_.end());
  return SpanUnion(std::move(all));
}

SpanUnion SpanUnion::intersect(const SpanUnion& o) const {
  std::vector<Span> out;
  for (const auto& a : spans_)
    for (const auto& b : o.spans_) {
      Span s = kdyn::intersect(a, b);
      if (!s.empty()) out.push_back(s);
    }
  return SpanUnion(std::move(out));
}

namespace {

std::vector<Span> span_minus(const Span& a, const Span& b) {
  Span i = intersect(a, b);
  if (i.empty()) return {a};
  std::vector<Span> out;
  Span left{a.lo, i.lo, a.lo_closed, !i.lo_closed};
  Span right{i.hi, a.hi, !i.hi_closed, a.hi_closed};
  if (!left.empty()) out.push_back(left);
  if (!right.empty()) out.push_back(right);
  return out;
}

}  // namespace

SpanUnion SpanUnion::minus(const SpanUnion& o) const {
  std::vector<Span> pieces = spans_;
  for (const auto& b : o.spans_) {
    std::vector<Span> next;
    for (const auto& p : pieces) {
      if (p.hi < b.lo || b.hi < p.lo) {
        next.push_back(p);
        continue;
      }
      auto cut = span_minus(p, b);
      next.insert(next.end(), cut.begin(), cut.end());
    }
    pieces = std::move(next);
  }
  return SpanUnion(std::move(pieces));
}

// ---------------------------------------------------------------- IFS

Interval IfsDescriptor::hull() const {
  Rational lo = offsets.front() / (1 - ratios.front());
  Rational hi = offsets.back() / (1 - ratios.back());
  return {lo, hi};
}

Interval IfsDescriptor::child(const Interval& cyl, std::size_t i) const {
  Interval h = hull();
  Rational scale = cyl.length() / h.length();
  Rational lo = cyl.lo + (ratios[i] * h.lo + offsets[i] - h.lo) * scale;
  return {lo, lo + ratios[i] * cyl.length()};
}

int IfsDescriptor::letter_index(char c) const {
  auto pos = alphabet.find(c);
  return pos == std::string::npos ? -1 : static_cast<int>(pos);
}

bool IfsDescriptor::symmetric() const {
  Interval h = hull();
  Rational s = h.lo + h.hi;
  for (std::size_t i = 0; i < size(); ++i) {
    Interval a = child(h, i), b = child(h, size() - 1 - i);
    if (a.lo != s - b.hi || a.hi != s - b.lo) return false;
  }
  return true;
}

void IfsDescriptor::validate() const {
  if (size() < 2) throw std::invalid_argument("IFS needs at least two maps");
  if (offsets.size() != size() || alphabet.size() != size())
    throw std::invalid_argument("IFS ratios, offsets and alphabet differ in length");
  if (depth < 0) throw std::invalid_argument("IFS depth must be >= 0");
  for (std::size_t i = 0; i < size(); ++i) {
    if (!(ratios[i] > 0 && ratios[i] < 1)) throw std::invalid_argument("IFS ratio outside (0,1)");
    if (ratios[i].get_num() != 1) throw std::invalid_argument("IFS ratios must be 1/n");
    if (std::count(alphabet.begin(), alphabet.end(), alphabet[i]) != 1)
      throw std::invalid_argument("IFS alphabet letters must be distinct");
  }
  Interval h = hull();
  if (!(h.lo < h.hi)) throw std::invalid_argument("IFS hull is degenerate");
  for (std::size_t i = 0; i < size(); ++i) {
    Interval c = child(h, i);
    if (c.lo < h.lo || c.hi > h.hi) throw std::invalid_argument("IFS piece leaves the hull");
    if (i + 1 < size() && !(c.hi < child(h, i + 1).lo))
      throw std::invalid_argument("IFS pieces must be disjoint and increasing");
  }
}

// ---------------------------------------------------------------- CompactSet

CompactSet CompactSet::from_intervals(std::vector<Interval> intervals) {
  if (intervals.empty()) throw std::invalid_argument("compact set needs at least one interval");
  for (const auto& iv : intervals)
    if (iv.lo > iv.hi) throw std::invalid_argument("interval with left > right");
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  CompactSet k;
  for (auto& iv : intervals) {
    if (!k.intervals_.empty() && iv.lo <= k.intervals_.back().hi) {
      if (iv.hi > k.intervals_.back().hi) k.intervals_.back().hi = iv.hi;
    } else {
      k.intervals_.push_back(iv);
    }
  }
  return k;
}

CompactSet CompactSet::from_ifs(IfsDescriptor ifs) {
  ifs.validate();
  CompactSet k;
  k.ifs_ = std::move(ifs);
  k.hull_ = k.ifs_->hull();
  for (std::size_t i = 0; i < k.ifs_->size(); ++i)
    k.rel_lo_.push_back((k.ifs_->ratios[i] * k.hull_.lo + k.ifs_->offsets[i] - k.hull_.lo) / k.hull_.length());
  for (std::size_t i = 0; i < k.ifs_->size(); ++i) k.kids_.push_back(k.child(k.hull_, i));
  k.intervals_ = k.cells(k.ifs_->depth);
  return k;
}

Interval CompactSet::child(const Interval& cyl, std::size_t i) const {
  Rational len = cyl.hi - cyl.lo;
  Rational lo = cyl.lo + rel_lo_[i] * len;
  Rational hi = lo + ifs_->ratios[i] * len;
  return {std::move(lo), std::move(hi)};
}

namespace {

struct Trace {
  bool member = false;
  std::optional<Rational> above;  // nearest K point across a gap on the right
  std::optional<Rational> below;
};

// Follows x through the inverse branches until the orbit cycles (Brent).
Trace trace_ifs(const IfsDescriptor& ifs, const std::vector<Interval>& kids, const Rational& x) {
  Trace t;
  Rational y = x, scale = 1, shift = 0;
  Rational tortoise = x;
  std::size_t power = 1, lam = 0;
  while (true) {
    std::size_t i = 0;
    while (i < kids.size() && !kids[i].contains(y)) ++i;
    if (i == kids.size()) return t;
    if (!t.above && y == kids[i].hi && i + 1 < kids.size()) t.above = scale * kids[i + 1].lo + shift;
    if (!t.below && y == kids[i].lo && i > 0) t.below = scale * kids[i - 1].hi + shift;
    shift += scale * ifs.offsets[i];
    scale *= ifs.ratios[i];
    y -= ifs.offsets[i];
    y /= ifs.ratios[i];
    ++lam;
    if (y == tortoise) {
      t.member = true;
      return t;
    }
    if (lam == power) {
      tortoise = y;
      power *= 2;
      lam = 0;
    }
  }
}

}  // namespace

bool CompactSet::contains(const Rational& x) const {
  if (ifs_) return trace_ifs(*ifs_, kids_, x).member;
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                             [](const Rational& v, const Interval& iv) { return v < iv.lo; });
  if (it == intervals_.begin()) return false;
  return std::prev(it)->contains(x);
}

bool CompactSet::meets(const Span& s) const {
  if (s.empty()) return false;
  if (s.lo == s.hi) return contains(s.lo);
  if (!ifs_) {
    for (const auto& iv : intervals_)
      if (!intersect(Span::closed(iv.lo, iv.hi), s).empty()) return true;
    return false;
  }
  // only cylinders straddling an end of s need splitting
  std::vector<Interval> todo{hull_};
  while (!todo.empty()) {
    Interval cyl = std::move(todo.back());
    todo.pop_back();
    if (cyl.hi < s.lo || cyl.lo > s.hi) continue;
    if (s.contains(cyl.lo) || s.contains(cyl.hi)) return true;
    if (cyl.hi == s.lo || cyl.lo == s.hi) continue;
    for (std::size_t i = 0; i < ifs_->size(); ++i) todo.push_back(child(cyl, i));
  }
  return false;
}

bool CompactSet::meets(const SpanUnion& u) const {
  return std::any_of(u.spans().begin(), u.spans().end(), [&](const Span& s) { return meets(s); });
}

std::optional<Rational> CompactSet::first_at_or_after(const Rational& x) const {
  if (x <= min()) return min();
  if (x > max()) return std::nullopt;
  if (!ifs_) {
    for (const auto& iv : intervals_) {
      if (iv.hi < x) continue;
      return iv.lo >= x ? iv.lo : x;
    }
    return std::nullopt;
  }
  if (contains(x)) return x;
  Interval cyl = hull_;
  while (true) {
    bool descended = false;
    for (std::size_t i = 0; i < ifs_->size(); ++i) {
      Interval c = child(cyl, i);
      if (c.hi < x) continue;
      if (c.lo >= x) return c.lo;
      cyl = c;
      descended = true;
      break;
    }
    if (!descended) return std::nullopt;
  }
}

std::optional<Rational> CompactSet::last_at_or_before(const Rational& x) const {
  if (x >= max()) return max();
  if (x < min()) return std::nullopt;
  if (!ifs_) {
    for (auto it = intervals_.rbegin(); it != intervals_.rend(); ++it) {
      if (it->lo > x) continue;
      return it->hi <= x ? it->hi : x;
    }
    return std::nullopt;
  }
  if (contains(x)) return x;
  Interval cyl = hull_;
  while (true) {
    bool descended = false;
    for (std::size_t j = ifs_->size(); j-- > 0;) {
      Interval c = child(cyl, j);
      if (c.lo > x) continue;
      if (c.hi <= x) return c.hi;
      cyl = c;
      descended = true;
      break;
    }
    if (!descended) return std::nullopt;
  }
}

std::optional<Rational> CompactSet::next_across_gap(const Rational& x) const {
  if (ifs_) return trace_ifs(*ifs_, kids_, x).above;
  for (std::size_t i = 0; i + 1 < intervals_.size(); ++i)
    if (intervals_[i].hi == x) return intervals_[i + 1].lo;
  return std::nullopt;
}

std::optional<Rational> CompactSet::prev_across_gap(const Rational& x) const {
  if (ifs_) return trace_ifs(*ifs_, kids_, x).below;
  for (std::size_t i = 1; i < intervals_.size(); ++i)
    if (intervals_[i].lo == x) return intervals_[i - 1].hi;
  return std::nullopt;
}

std::optional<Interval> CompactSet::hull_of(const Span& s) const {
  if (s.empty()) return std::nullopt;
  if (s.lo == s.hi) {
    if (contains(s.lo)) return Interval{s.lo, s.lo};
    return std::nullopt;
  }
  std::optional<Rational> m;
  if (!s.lo_closed && contains(s.lo)) {
    if (s.lo == max()) return std::nullopt;
    auto g = next_across_gap(s.lo);
    m = g ? *g : s.lo;
  } else {
    m = first_at_or_after(s.lo);
  }
  if (!m || *m > s.hi || (*m == s.hi && !s.hi_closed)) return std::nullopt;

  std::optional<Rational> big;
  if (!s.hi_closed && contains(s.hi)) {
    if (s.hi == min()) return std::nullopt;
    auto g = prev_across_gap(s.hi);
    big = g ? *g : s.hi;
  } else {
    big = last_at_or_before(s.hi);
  }
  if (!big || *big < *m) return std::nullopt;
  return Interval{*m, *big};
}

bool CompactSet::is_gap(const Rational& a, const Rational& b) const {
  if (!(a < b)) return false;
  if (ifs_) {
    Trace t = trace_ifs(*ifs_, kids_, a);
    return t.member && t.above == b;
  }
  if (!contains(a) || !contains(b)) return false;
  return !meets(Span::open(a, b));
}

std::vector<Gap> CompactSet::gaps() const {
  std::vector<Gap> out;
  out.push_back({GapKind::left_unbounded, std::nullopt, min()});
  for (std::size_t i = 0; i + 1 < intervals_.size(); ++i)
    out.push_back({GapKind::bounded, intervals_[i].hi, intervals_[i + 1].lo});
  out.push_back({GapKind::right_unbounded, max(), std::nullopt});
  return out;
}

std::vector<Interval> CompactSet::cells(int depth) const {
  if (!ifs_) throw std::logic_error("cells() needs an IFS structure");
  std::vector<Interval> level{hull_};
  for (int d = 0; d < depth; ++d) {
    std::vector<Interval> next;
    next.reserve(level.size() * ifs_->size());
    for (const auto& c : level)
      for (std::size_t i = 0; i < ifs_->size(); ++i) next.push_back(child(c, i));
    level = std::move(next);
  }
  return level;
}

Interval CompactSet::cylinder(std::string_view address) const {
  if (!ifs_) throw std::logic_error("cylinder() needs an IFS structure");
  Interval cyl = hull_;
  for (char c : address) {
    int i = ifs_->letter_index(c);
    if (i < 0) throw std::invalid_argument(std::string("letter not in IFS alphabet: ") + c);
    cyl = child(cyl, static_cast<std::size_t>(i));
  }
  return cyl;
}

std::optional<std::string> CompactSet::address_of(const Interval& target) const {
  if (!ifs_) return std::nullopt;
  Interval cyl = hull_;
  std::string addr;
  while (!(cyl == target)) {
    if (cyl.length() <= target.length()) return std::nullopt;
    bool found = false;
    for (std::size_t i = 0; i < ifs_->size(); ++i) {
      Interval c = child(cyl, i);
      if (c.lo <= target.lo && target.hi <= c.hi) {
        cyl = c;
        addr.push_back(ifs_->alphabet[i]);
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
  }
  return addr;
}

std::string CompactSet::address_of_point(const Rational& x, int depth) const {
  if (!ifs_) throw std::logic_error("address_of_point() needs an IFS structure");
  Interval cyl = hull_;
  std::string addr;
  for (int d = 0; d < depth; ++d) {
    bool found = false;
    for (std::size_t i = 0; i < ifs_->size(); ++i) {
      Interval c = child(cyl, i);
      if (c.contains(x)) {
        cyl = c;
        addr.push_back(ifs_->alphabet[i]);
        found = true;
        break;
      }
    }
    if (!found) throw std::invalid_argument("point is not in K: " + to_string(x));
  }
  return addr;
}

CompactSet CompactSet::refined(int depth) const {
  if (!ifs_) return *this;
  IfsDescriptor d = *ifs_;
  d.depth = depth;
  return from_ifs(std::move(d));
}

SpanUnion CompactSet::as_union() const {
  std::vector<Span> s;
  for (const auto& iv : intervals_) s.push_back(Span::closed(iv.lo, iv.hi));
  return SpanUnion(std::move(s));
}

bool CompactSet::operator==(const CompactSet& o) const {
  return intervals_ == o.intervals_ && ifs_ == o.ifs_;
}

CompactSet make_compact_set(std::vector<std::pair<Rational, Rational>> intervals) {
  std::vector<Interval> iv;
  for (auto& [l, r] : intervals) iv.push_back({l, r});
  return CompactSet::from_intervals(std::move(iv));
}

IfsDescriptor ternary_ifs(int depth) {
  return {{Rational(1, 3), Rational(1, 3)}, {Rational(0), Rational(2, 3)}, "02", depth};
}

CompactSet ternary_cantor(int depth) { return CompactSet::from_ifs(ternary_ifs(depth)); }

Space share(CompactSet k) { return std::make_shared<const CompactSet>(std::move(k)); }

std::vector<Gap> gaps(const CompactSet& k) { return k.gaps(); }

// ---------------------------------------------------------------- Region

Region::Region(Space space, SpanUnion set) : space_(std::move(space)), set_(std::move(set)) {
  if (!space_) throw std::invalid_argument("region without a space");
}

Region Region::whole(Space space) {
  auto u = space->as_union();
  return Region(std::move(space), std::move(u));
}

Region Region::none(Space space) { return Region(std::move(space), SpanUnion()); }

Region Region::cylinder(Space space, std::string_view address) {
  Interval c = space->cylinder(address);
  return Region(std::move(space), SpanUnion(Span::closed(c.lo, c.hi)));
}

bool Region::contains(const Rational& x) const { return set_.contains(x) && space_->contains(x); }
bool Region::is_empty() const { return !space_->meets(set_); }
Region Region::unite(const Region& o) const { return Region(space_, set_.unite(o.set_)); }
Region Region::intersect(const Region& o) const { return Region(space_, set_.intersect(o.set_)); }
Region Region::minus(const Region& o) const { return Region(space_, set_.minus(o.set_)); }
Region Region::complement() const { return Region(space_, space_->as_union().minus(set_)); }
bool Region::subset_of(const Region& o) const { return !space_->meets(set_.minus(o.set_)); }
bool Region::disjoint_from(const Region& o) const { return !space_->meets(set_.intersect(o.set_)); }
bool Region::same_as(const Region& o) const { return subset_of(o) && o.subset_of(*this); }

std::optional<Interval> Region::hull() const {
  std::optional<Interval> out;
  for (const auto& s : set_.spans()) {
    auto h = space_->hull_of(s);
    if (!h) continue;
    if (!out) out = h;
    else out->hi = h->hi;
  }
  return out;
}

Rational Region::diameter() const {
  auto h = hull();
  return h ? h->length() : Rational(0);
}

// ---------------------------------------------------------------- points

PointSet PointSet::make(const CompactSet& k, std::vector<Rational> points) {
  std::sort(points.begin(), points.end());
  for (std::size_t i = 0; i + 1 < points.size(); ++i)
    if (points[i] == points[i + 1]) throw std::invalid_argument("duplicate point " + to_string(points[i]));
  for (const auto& p : points)
    if (!k.contains(p)) throw std::invalid_argument("point not in K: " + to_string(p));
  PointSet s;
  s.points_ = std::move(points);
  return s;
}

PointSet PointSet::unchecked(std::vector<Rational> sorted_points) {
  PointSet s;
  s.points_ = std::move(sorted_points);
  return s;
}

Region epsilon_neighborhood(const PointSet& a, const Rational& eps, Space k) {
  if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
  std::vector<Span> spans;
  for (const auto& p : a.points()) spans.push_back(Span::open(p - eps, p + eps));
  return Region(std::move(k), SpanUnion(std::move(spans)));
}

namespace {

// sup over x in a of d(x, b).
Rational directed_distance(const CompactSet& a, const CompactSet& b) {
  const auto& bi = b.intervals();
  auto dist = [&](const Rational& x) {
    Rational best = -1;
    for (const auto& iv : bi) {
      Rational d = x < iv.lo ? Rational(iv.lo - x) : x > iv.hi ? Rational(x - iv.hi) : Rational(0);
      if (best < 0 || d < best) best = d;
    }
    return best;
  };
  std::vector<Rational> candidates;
  for (const auto& iv : a.intervals()) {
    candidates.push_back(iv.lo);
    candidates.push_back(iv.hi);
  }
  for (std::size_t i = 0; i + 1 < bi.size(); ++i) {
    Rational mid = (bi[i].hi + bi[i + 1].lo) / 2;
    for (const auto& iv : a.intervals())
      if (iv.contains(mid)) candidates.push_back(mid);
  }
  Rational best = 0;
  for (const auto& c : candidates) best = std::max(best, dist(c));
  return best;
}

}  // namespace

Rational hausdorff_distance(const CompactSet& a, const CompactSet& b) {
  if (a.intervals().empty() || b.intervals().empty())
    throw std::invalid_argument("hausdorff distance of an empty set");
  return std::max(directed_distance(a, b), directed_distance(b, a));
}

Rational delta_m(const PointSet& points) {
  const auto& p = points.points();
  if (p.size() < 2) throw std::invalid_argument("delta_m needs at least two points");
  Rational best = p[1] - p[0];
  for (std::size_t i = 1; i + 1 < p.size(); ++i) best = std::min(best, Rational(p[i + 1] - p[i]));
  return best;
}

}  // namespace kdyn
