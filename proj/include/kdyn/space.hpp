#pragma once

#include "kdyn/rational.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kdyn {

struct Interval {
  Rational lo, hi;

  Rational length() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

// An interval whose ends may be open; the empty span is allowed.
struct Span {
  Rational lo, hi;
  bool lo_closed = true;
  bool hi_closed = true;

  static Span closed(const Rational& lo, const Rational& hi) { return {lo, hi, true, true}; }
  static Span open(const Rational& lo, const Rational& hi) { return {lo, hi, false, false}; }
  static Span point(const Rational& x) { return {x, x, true, true}; }

  bool empty() const;
  bool contains(const Rational& x) const;
  bool operator==(const Span& o) const = default;
};

Span intersect(const Span& a, const Span& b);
// x -> slope * x + offset, flags follow the ends.
Span affine_image(const Span& s, const Rational& slope, const Rational& offset);

// Finite union of spans, kept sorted, disjoint and merged.
class SpanUnion {
 public:
  SpanUnion() = default;
  explicit SpanUnion(std::vector<Span> spans);
  explicit SpanUnion(Span s) : SpanUnion(std::vector<Span>{std::move(s)}) {}

  const std::vector<Span>& spans() const { return spans_; }
  bool empty() const { return spans_.empty(); }
  bool contains(const Rational& x) const;

  SpanUnion unite(const SpanUnion& o) const;
  SpanUnion intersect(const SpanUnion& o) const;
  SpanUnion minus(const SpanUnion& o) const;

  bool operator==(const SpanUnion& o) const = default;

 private:
  std::vector<Span> spans_;
};

// Self-similar Cantor set generated by increasing similarities x -> r_i x + o_i.
// Every ratio is the reciprocal of an integer, so preimage orbits of rationals
// are finite and membership is decidable.
struct IfsDescriptor {
  std::vector<Rational> ratios;
  std::vector<Rational> offsets;
  std::string alphabet;
  int depth = 0;

  std::size_t size() const { return ratios.size(); }
  Interval hull() const;
  Interval child(const Interval& cylinder, std::size_t i) const;
  int letter_index(char c) const;
  // The first-level pieces are symmetric under the reflection of the hull.
  bool symmetric() const;
  void validate() const;
  bool operator==(const IfsDescriptor& o) const = default;
};

enum class GapKind { bounded, left_unbounded, right_unbounded };

struct Gap {
  GapKind kind;
  std::optional<Rational> left;   // extremity in K on the left
  std::optional<Rational> right;  // extremity in K on the right
};

// A compact K, either a finite union of closed intervals or a Cantor set given
// by an IFS. For IFS sets the interval list is the depth-d approximation, while
// points, regions and maps are always handled against the limit set itself.
class CompactSet {
 public:
  static CompactSet from_intervals(std::vector<Interval> intervals);
  static CompactSet from_ifs(IfsDescriptor ifs);

  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::optional<IfsDescriptor>& ifs() const { return ifs_; }
  bool structured() const { return ifs_.has_value(); }
  int depth() const { return ifs_ ? ifs_->depth : 0; }

  Rational min() const { return intervals_.front().lo; }
  Rational max() const { return intervals_.back().hi; }
  Rational diameter() const { return max() - min(); }

  bool contains(const Rational& x) const;
  bool meets(const Span& s) const;
  bool meets(const SpanUnion& u) const;

  // Smallest point of K that is >= x (resp. largest <= x).
  std::optional<Rational> first_at_or_after(const Rational& x) const;
  std::optional<Rational> last_at_or_before(const Rational& x) const;
  // For x in K: the nearest point of K above x if x is a left gap extremity.
  std::optional<Rational> next_across_gap(const Rational& x) const;
  std::optional<Rational> prev_across_gap(const Rational& x) const;
  // Closure of K ∩ s as [inf, sup], or nullopt when K ∩ s is empty.
  std::optional<Interval> hull_of(const Span& s) const;

  bool is_gap(const Rational& a, const Rational& b) const;
  std::vector<Gap> gaps() const;

  // Cylinders of the given depth (IFS only), in increasing order.
  std::vector<Interval> cells(int depth) const;
  Interval cylinder(std::string_view address) const;
  std::optional<std::string> address_of(const Interval& cyl) const;
  // Address of the depth-d cell containing x (IFS only).
  std::string address_of_point(const Rational& x, int depth) const;

  CompactSet refined(int depth) const;
  SpanUnion as_union() const;

  bool operator==(const CompactSet& o) const;

 private:
  Interval child(const Interval& cyl, std::size_t i) const;

  std::vector<Interval> intervals_;
  std::optional<IfsDescriptor> ifs_;
  // cached IFS geometry: hull and each piece's left end relative to the hull
  Interval hull_;
  std::vector<Rational> rel_lo_;
  std::vector<Interval> kids_;
};

using Space = std::shared_ptr<const CompactSet>;

CompactSet make_compact_set(std::vector<std::pair<Rational, Rational>> intervals);
CompactSet ternary_cantor(int depth);
IfsDescriptor ternary_ifs(int depth);
Space share(CompactSet k);

std::vector<Gap> gaps(const CompactSet& k);

// A subset of K described by a span union; only its trace on K matters.
class Region {
 public:
  Region(Space space, SpanUnion set);
  static Region whole(Space space);
  static Region none(Space space);
  static Region cylinder(Space space, std::string_view address);

  const Space& space() const { return space_; }
  const SpanUnion& set() const { return set_; }

  bool contains(const Rational& x) const;
  bool is_empty() const;
  Region unite(const Region& o) const;
  Region intersect(const Region& o) const;
  Region minus(const Region& o) const;
  Region complement() const;
  bool subset_of(const Region& o) const;
  bool disjoint_from(const Region& o) const;
  bool same_as(const Region& o) const;
  std::optional<Interval> hull() const;
  Rational diameter() const;

 private:
  Space space_;
  SpanUnion set_;
};

class PointSet {
 public:
  PointSet() = default;
  // Sorts; rejects duplicates and points outside K.
  static PointSet make(const CompactSet& k, std::vector<Rational> points);
  static PointSet unchecked(std::vector<Rational> sorted_points);

  const std::vector<Rational>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  bool operator==(const PointSet& o) const = default;

 private:
  std::vector<Rational> points_;
};

Region epsilon_neighborhood(const PointSet& a, const Rational& eps, Space k);
Rational hausdorff_distance(const CompactSet& a, const CompactSet& b);
Rational delta_m(const PointSet& points);

}  // namespace kdyn
