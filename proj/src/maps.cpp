#include "kdyn/maps.hpp"

#include <algorithm>
#include <stdexcept>

namespace kdyn {

Interval Branch::image() const {
  Rational a = (*this)(source.lo), b = (*this)(source.hi);
  return a <= b ? Interval{a, b} : Interval{b, a};
}

namespace {

bool same_formula(const Branch& a, const Branch& b) {
  return a.slope == b.slope && a.offset == b.offset;
}

void sort_by_source(std::vector<Branch>& bs) {
  std::sort(bs.begin(), bs.end(),
            [](const Branch& a, const Branch& b) { return a.source.lo < b.source.lo; });
}

// Merges complete sibling sets sharing one formula into their parent cylinder.
std::vector<Branch> canonical_ifs(const CompactSet& k, std::vector<Branch> bs) {
  const auto& ifs = *k.ifs();
  const std::size_t arity = ifs.size();
  struct Item {
    Branch b;
    std::string addr;
  };
  std::vector<Item> stack;
  for (auto& b : bs) {
    stack.push_back({b, *k.address_of(b.source)});
    while (stack.size() >= arity) {
      const Item& last = stack.back();
      if (last.addr.empty() || last.addr.back() != ifs.alphabet.back()) break;
      std::string parent = last.addr.substr(0, last.addr.size() - 1);
      bool ok = true;
      for (std::size_t j = 0; j < arity && ok; ++j) {
        const Item& it = stack[stack.size() - arity + j];
        ok = it.addr == parent + ifs.alphabet[j] && same_formula(it.b, last.b);
      }
      if (!ok) break;
      Branch merged{k.cylinder(parent), last.b.slope, last.b.offset};
      if (!k.address_of(merged.image())) break;
      stack.resize(stack.size() - arity);
      stack.push_back({merged, parent});
    }
  }
  std::vector<Branch> out;
  out.reserve(stack.size());
  for (auto& it : stack) out.push_back(std::move(it.b));
  return out;
}

std::vector<Branch> canonical_explicit(std::vector<Branch> bs) {
  std::vector<Branch> out;
  for (auto& b : bs) {
    if (!out.empty()) {
      Branch& prev = out.back();
      // touching pieces always share a component
      if (prev.source.hi == b.source.lo && same_formula(prev, b)) {
        prev.source.hi = b.source.hi;
        continue;
      }
    }
    out.push_back(b);
  }
  return out;
}

// Splits sources into pieces lying inside single components of K.
std::vector<Branch> split_by_component(const CompactSet& k, const std::vector<Branch>& bs) {
  std::vector<Branch> out;
  for (const auto& b : bs)
    for (const auto& c : k.intervals()) {
      Rational lo = std::max(b.source.lo, c.lo), hi = std::min(b.source.hi, c.hi);
      if (lo <= hi) out.push_back({{lo, hi}, b.slope, b.offset});
    }
  sort_by_source(out);
  // a degenerate piece sitting on the end of a longer one is redundant
  std::vector<Branch> kept;
  for (const auto& b : out) {
    if (!kept.empty() && b.source.lo == b.source.hi && kept.back().source.hi == b.source.lo) {
      if (kept.back()(b.source.lo) != b(b.source.lo)) throw MapError("branches disagree at a shared point");
      continue;
    }
    if (!kept.empty() && kept.back().source.lo == kept.back().source.hi &&
        kept.back().source.lo == b.source.lo) {
      if (kept.back()(b.source.lo) != b(b.source.lo)) throw MapError("branches disagree at a shared point");
      kept.back() = b;
      continue;
    }
    kept.push_back(b);
  }
  return kept;
}

// Pieces (sorted) must cover every component of K exactly, touching only at shared ends.
void check_tiles_explicit(const CompactSet& k, const std::vector<Interval>& pieces, const char* what) {
  std::size_t p = 0;
  for (const auto& c : k.intervals()) {
    if (p == pieces.size() || pieces[p].lo != c.lo)
      throw MapError(std::string(what) + " do not cover K");
    Rational reach = pieces[p].hi;
    ++p;
    while (reach < c.hi) {
      if (p == pieces.size() || pieces[p].lo != reach)
        throw MapError(std::string(what) + " overlap or leave holes");
      reach = pieces[p].hi;
      ++p;
    }
    if (reach != c.hi) throw MapError(std::string(what) + " leave a component");
  }
  if (p != pieces.size()) throw MapError(std::string(what) + " overlap or leave K");
}

void check_tiles_ifs(const CompactSet& k, std::vector<Interval> pieces, const char* what) {
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  if (pieces.front().lo != k.min() || pieces.back().hi != k.max())
    throw MapError(std::string(what) + " do not cover K");
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    if (!(pieces[i].hi < pieces[i + 1].lo)) throw MapError(std::string(what) + " overlap");
    if (k.meets(Span::open(pieces[i].hi, pieces[i + 1].lo)))
      throw MapError(std::string(what) + " leave part of K uncovered");
  }
}

std::vector<Branch> validate(const CompactSet& k, std::vector<Branch> bs) {
  if (bs.empty()) throw MapError("map without branches");
  for (const auto& b : bs) {
    if (b.slope == 0) throw MapError("branch with zero slope");
    if (b.source.lo > b.source.hi) throw MapError("branch source with left > right");
  }
  if (k.structured()) {
    bool sym = k.ifs()->symmetric();
    std::vector<Interval> srcs, imgs;
    for (const auto& b : bs) {
      if (!k.address_of(b.source)) throw MapError("branch source is not a cylinder");
      if (!k.address_of(b.image())) throw MapError("branch image is not a cylinder");
      if (b.slope < 0 && !sym) throw MapError("reversing branch on an asymmetric IFS");
      srcs.push_back(b.source);
      imgs.push_back(b.image());
    }
    check_tiles_ifs(k, srcs, "branch sources");
    check_tiles_ifs(k, imgs, "branch images");
    sort_by_source(bs);
    return canonical_ifs(k, std::move(bs));
  }

  auto pieces = split_by_component(k, bs);
  std::vector<Interval> srcs;
  for (const auto& b : pieces) srcs.push_back(b.source);
  check_tiles_explicit(k, srcs, "branch sources");
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
    if (pieces[i].source.hi == pieces[i + 1].source.lo &&
        pieces[i](pieces[i].source.hi) != pieces[i + 1](pieces[i + 1].source.lo))
      throw MapError("map is discontinuous inside a component");

  struct Img {
    Interval iv;
    Rational src_lo_end, src_hi_end;  // source points sent to iv.lo, iv.hi
  };
  std::vector<Img> imgs;
  for (const auto& b : pieces) {
    Interval im = b.image();
    bool inside = std::any_of(k.intervals().begin(), k.intervals().end(),
                              [&](const Interval& c) { return c.lo <= im.lo && im.hi <= c.hi; });
    if (!inside) throw MapError("branch image leaves K");
    if (b.slope > 0) imgs.push_back({im, b.source.lo, b.source.hi});
    else imgs.push_back({im, b.source.hi, b.source.lo});
  }
  std::sort(imgs.begin(), imgs.end(), [](const Img& a, const Img& b) {
    if (a.iv.lo != b.iv.lo) return a.iv.lo < b.iv.lo;
    return a.iv.hi < b.iv.hi;
  });
  std::vector<Interval> ivs;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    if (i > 0 && imgs[i].iv.lo == imgs[i].iv.hi && imgs[i - 1].iv.hi == imgs[i].iv.lo) {
      if (imgs[i].src_lo_end != imgs[i - 1].src_hi_end) throw MapError("map is not injective");
      continue;
    }
    if (i > 0 && imgs[i - 1].iv.hi == imgs[i].iv.lo && imgs[i - 1].src_hi_end != imgs[i].src_lo_end)
      throw MapError("map is not injective");
    ivs.push_back(imgs[i].iv);
  }
  check_tiles_explicit(k, ivs, "branch images");
  return canonical_explicit(std::move(pieces));
}

std::vector<Branch> canonicalize(const CompactSet& k, std::vector<Branch> bs) {
  sort_by_source(bs);
  if (k.structured()) return canonical_ifs(k, std::move(bs));
  return canonical_explicit(std::move(bs));
}

}  // namespace

PAHomeo PAHomeo::make(Space space, std::vector<Branch> branches, Word label) {
  if (!space) throw MapError("map without a space");
  PAHomeo f;
  f.branches_ = validate(*space, std::move(branches));
  f.space_ = std::move(space);
  f.label_ = std::move(label);
  return f;
}

PAHomeo PAHomeo::trusted(Space space, std::vector<Branch> branches, Word label) {
  PAHomeo f;
  f.branches_ = canonicalize(*space, std::move(branches));
  f.space_ = std::move(space);
  f.label_ = std::move(label);
  return f;
}

PAHomeo PAHomeo::identity(Space space) {
  std::vector<Branch> bs;
  if (space->structured()) bs.push_back({{space->min(), space->max()}, 1, 0});
  else
    for (const auto& c : space->intervals()) bs.push_back({c, 1, 0});
  PAHomeo f;
  f.branches_ = std::move(bs);
  f.space_ = std::move(space);
  return f;
}

PAHomeo PAHomeo::from_prefix_table(const PrefixTable& table, Space space, Word label) {
  if (!space || !space->structured()) throw MapError("prefix tables need an IFS space");
  std::size_t longest = 0;
  for (const auto& r : table) longest = std::max({longest, r.src.size(), r.dst.size()});
  if (static_cast<int>(longest) > space->depth())
    throw MapError("space depth " + std::to_string(space->depth()) + " is below address length " +
                   std::to_string(longest));
  std::vector<Branch> bs;
  for (const auto& r : table) {
    if (r.sign != 1 && r.sign != -1) throw MapError("orientation must be +1 or -1");
    Interval s = space->cylinder(r.src), d = space->cylinder(r.dst);
    Rational slope = r.sign * d.length() / s.length();
    Rational offset = r.sign > 0 ? Rational(d.lo - slope * s.lo) : Rational(d.hi - slope * s.lo);
    bs.push_back({s, slope, offset});
  }
  return make(std::move(space), std::move(bs), std::move(label));
}

PAHomeo PAHomeo::with_label(Word label) const {
  PAHomeo f = *this;
  f.label_ = std::move(label);
  return f;
}

const Branch& PAHomeo::branch_at(const Rational& x) const {
  auto it = std::upper_bound(branches_.begin(), branches_.end(), x,
                             [](const Rational& v, const Branch& b) { return v < b.source.lo; });
  if (it == branches_.begin() || x > std::prev(it)->source.hi)
    throw MapError("no branch contains " + to_string(x));
  return *std::prev(it);
}

Rational PAHomeo::apply_unchecked(const Rational& x) const { return branch_at(x)(x); }

Rational PAHomeo::operator()(const Rational& x) const {
  if (!space_->contains(x)) throw MapError("point not in K: " + to_string(x));
  return apply_unchecked(x);
}

bool PAHomeo::is_identity() const {
  return std::all_of(branches_.begin(), branches_.end(),
                     [](const Branch& b) { return b.slope == 1 && b.offset == 0; });
}

PrefixTable PAHomeo::prefix_table() const {
  if (!space_->structured()) throw MapError("prefix tables need an IFS space");
  PrefixTable t;
  for (const auto& b : branches_)
    t.push_back({*space_->address_of(b.source), *space_->address_of(b.image()), b.slope > 0 ? 1 : -1});
  return t;
}

bool PAHomeo::operator==(const PAHomeo& o) const {
  return (space_ == o.space_ || *space_ == *o.space_) && branches_ == o.branches_;
}

Rational apply(const PAHomeo& f, const Rational& x) { return f(x); }

Region image(const PAHomeo& f, const Region& s) {
  std::vector<Span> out;
  for (const auto& b : f.branches()) {
    Span src = Span::closed(b.source.lo, b.source.hi);
    for (const auto& sp : s.set().spans()) {
      Span piece = intersect(sp, src);
      if (!piece.empty()) out.push_back(affine_image(piece, b.slope, b.offset));
    }
  }
  return Region(f.space(), SpanUnion(std::move(out)));
}

PAHomeo compose(const PAHomeo& f, const PAHomeo& g) {
  if (!(f.space() == g.space() || *f.space() == *g.space())) throw MapError("compose: spaces differ");
  const auto& fb = f.branches();
  std::vector<Branch> out;
  for (const auto& b : g.branches()) {
    Interval im = b.image();
    auto it = std::upper_bound(fb.begin(), fb.end(), im.lo,
                               [](const Rational& v, const Branch& x) { return v < x.source.lo; });
    if (it != fb.begin()) --it;
    for (; it != fb.end() && it->source.lo <= im.hi; ++it) {
      Rational lo = std::max(im.lo, it->source.lo), hi = std::min(im.hi, it->source.hi);
      if (lo > hi) continue;
      if (lo == hi && im.lo < im.hi) continue;
      Rational p = (lo - b.offset) / b.slope, q = (hi - b.offset) / b.slope;
      if (q < p) std::swap(p, q);
      out.push_back({{p, q}, it->slope * b.slope, it->slope * b.offset + it->offset});
      if (im.lo == im.hi) break;
    }
  }
  Word label = f.label();
  label.insert(label.end(), g.label().begin(), g.label().end());
  return PAHomeo::trusted(f.space(), std::move(out), std::move(label));
}

std::string inverse_name(const std::string& name) {
  const std::string suffix = "^-1";
  if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
    return name.substr(0, name.size() - suffix.size());
  return name + suffix;
}

Word inverse_word(const Word& w) {
  Word out;
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(inverse_name(*it));
  return out;
}

PAHomeo invert(const PAHomeo& f) {
  std::vector<Branch> out;
  for (const auto& b : f.branches()) {
    Rational s = 1 / b.slope;
    out.push_back({b.image(), s, -b.offset * s});
  }
  return PAHomeo::trusted(f.space(), std::move(out), inverse_word(f.label()));
}

PAHomeo power(const PAHomeo& f, int n) {
  PAHomeo base = n < 0 ? invert(f) : f;
  PAHomeo r = PAHomeo::identity(f.space());
  for (int i = 0; i < std::abs(n); ++i) r = compose(base, r);
  return r;
}

std::vector<BreakPair> break_pairs(const PAHomeo& f) {
  const auto& k = *f.space();
  std::vector<BreakPair> out;
  auto check = [&](const Rational& a, const Rational& b) {
    Rational fa = f.apply_unchecked(a), fb = f.apply_unchecked(b);
    if (fb < fa) std::swap(fa, fb);
    if (!k.is_gap(fa, fb)) out.push_back({a, b});
  };
  if (k.structured()) {
    const auto& bs = f.branches();
    for (std::size_t i = 0; i + 1 < bs.size(); ++i) check(bs[i].source.hi, bs[i + 1].source.lo);
  } else {
    const auto& iv = k.intervals();
    for (std::size_t i = 0; i + 1 < iv.size(); ++i) check(iv[i].hi, iv[i + 1].lo);
  }
  return out;
}

std::vector<Rational> break_points(const PAHomeo& f) {
  std::vector<Rational> pts;
  for (const auto& p : break_pairs(f)) {
    pts.push_back(p.a);
    pts.push_back(p.b);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

bool is_regular_on(const PAHomeo& f, const Rational& a, const Rational& b) {
  if (a > b) throw std::invalid_argument("is_regular_on: a > b");
  for (const auto& p : break_pairs(f))
    if (a <= p.a && p.b <= b) return false;
  return true;
}

std::optional<Rational> regularity_radius(const std::vector<PAHomeo>& gens) {
  if (gens.empty()) throw std::invalid_argument("regularity_radius: no generators");
  std::optional<Rational> r;
  for (const auto& g : gens)
    for (const auto& p : break_pairs(g))
      if (!r || p.b - p.a < *r) r = p.b - p.a;
  return r;
}

std::pair<Rational, Rational> slope_range(const PAHomeo& f, const Region& s) {
  std::optional<Rational> lo, hi;
  const auto& k = *f.space();
  for (const auto& b : f.branches()) {
    Span src = Span::closed(b.source.lo, b.source.hi);
    bool hit = std::any_of(s.set().spans().begin(), s.set().spans().end(),
                           [&](const Span& sp) { return k.meets(intersect(sp, src)); });
    if (!hit) continue;
    Rational a = abs(b.slope);
    if (!lo || a < *lo) lo = a;
    if (!hi || a > *hi) hi = a;
  }
  if (!lo) throw std::invalid_argument("slope_range: empty region");
  return {*lo, *hi};
}

std::optional<Rational> distortion(const PAHomeo& f, const Region& region) {
  const auto& k = *f.space();
  struct Piece {
    Interval hull;
    const Branch* b;
  };
  std::vector<Piece> pieces;
  for (const auto& b : f.branches()) {
    Span src = Span::closed(b.source.lo, b.source.hi);
    for (const auto& sp : region.set().spans())
      if (auto h = k.hull_of(intersect(sp, src))) pieces.push_back({*h, &b});
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& a, const Piece& b) { return a.hull.lo < b.hull.lo; });
  bool enough = pieces.size() >= 2 || (pieces.size() == 1 && pieces[0].hull.lo < pieces[0].hull.hi);
  if (!enough) throw std::invalid_argument("distortion: region has fewer than two points");

  std::optional<Rational> sup, inf;
  bool zero = false;
  auto note = [&](const Rational& q) {
    Rational a = abs(q);
    if (!sup || a > *sup) sup = a;
    if (!inf || a < *inf) inf = a;
  };
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (p.hull.lo < p.hull.hi) note(p.b->slope);
    for (std::size_t j = i + 1; j < pieces.size(); ++j) {
      const auto& q = pieces[j];
      std::vector<Rational> qs;
      for (const auto& x : {p.hull.lo, p.hull.hi})
        for (const auto& y : {q.hull.lo, q.hull.hi}) {
          if (x == y) {
            qs.push_back(p.b->slope);
            qs.push_back(q.b->slope);
          } else {
            qs.push_back(((*q.b)(y) - (*p.b)(x)) / (y - x));
          }
        }
      bool pos = std::all_of(qs.begin(), qs.end(), [](const Rational& v) { return v > 0; });
      bool neg = std::all_of(qs.begin(), qs.end(), [](const Rational& v) { return v < 0; });
      if (!pos && !neg) zero = true;
      for (const auto& v : qs) note(v);
    }
  }
  if (zero || *inf == 0) return std::nullopt;
  return *sup / *inf;
}

}  // namespace kdyn
