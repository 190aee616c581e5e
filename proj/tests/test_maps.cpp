#include <doctest.h>

#include "kdyn/fixtures.hpp"
#include "kdyn/maps.hpp"

#include <random>
#include <map>
#include <set>

using namespace kdyn;

namespace {

Rational q(const char* s) { return parse_rational(s); }

struct Fx {
  Space k = fixtures::space(5);
  PAHomeo H = fixtures::H(k), R = fixtures::R(k), G3 = fixtures::G3(k);
  PAHomeo A1 = fixtures::A1(k), A2 = fixtures::A2(k);
  std::vector<PAHomeo> free_gens{A1, A2, invert(A1), invert(A2)};
};

const Fx& fx() {
  static Fx f;
  return f;
}

PAHomeo random_word(std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len(1, max_len), pick(0, 3);
  PAHomeo w = PAHomeo::identity(fx().k);
  int n = len(rng);
  for (int i = 0; i < n; ++i) w = compose(fx().free_gens[pick(rng)], w);
  return w;
}

// A random point of K: a random depth-8 cell endpoint.
Rational random_point(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> bit(0, 1);
  Rational x = 0, scale = 1;
  for (int i = 0; i < 8; ++i) {
    scale /= 3;
    if (bit(rng)) x += 2 * scale;
  }
  if (bit(rng)) x += scale;
  return x;
}

std::vector<Rational> slopes(const PAHomeo& f) {
  std::vector<Rational> s;
  for (const auto& b : f.branches()) s.push_back(b.slope);
  return s;
}

// Independent oracle: every bounded gap of K up to the given depth whose image
// pair is not a gap of K (image gaps looked up at a deeper level).
std::vector<BreakPair> gap_oracle(const PAHomeo& f, int depth, int image_depth) {
  auto k = f.space()->refined(depth);
  static std::map<int, std::set<std::pair<Rational, Rational>>> cache;
  auto& deep = cache[image_depth];
  if (deep.empty())
    for (const auto& g : f.space()->refined(image_depth).gaps())
      if (g.kind == GapKind::bounded) deep.insert({*g.left, *g.right});
  std::vector<BreakPair> out;
  for (const auto& g : k.gaps()) {
    if (g.kind != GapKind::bounded) continue;
    Rational a = f(*g.left), b = f(*g.right);
    if (b < a) std::swap(a, b);
    if (!deep.count({a, b})) out.push_back({*g.left, *g.right});
  }
  return out;
}

}  // namespace

TEST_CASE("prefix tables") {
  const auto& f = fx();
  REQUIRE(f.H.branches().size() == 2);
  CHECK(f.H.branches()[0] == Branch{{0, q("1/3")}, 1, q("2/3")});
  CHECK(f.H.branches()[1] == Branch{{q("2/3"), 1}, 1, q("-2/3")});
  REQUIRE(f.R.branches().size() == 1);
  CHECK(f.R.branches()[0] == Branch{{0, 1}, -1, 1});
  CHECK(slopes(f.G3) == std::vector<Rational>{q("1/3"), 1, 3});
  CHECK(f.A1.prefix_table() == fixtures::table_A1());

  CHECK_THROWS_AS(PAHomeo::from_prefix_table({{"0", "0", 1}}, f.k), MapError);
  CHECK_THROWS_AS(PAHomeo::from_prefix_table({{"0", "0", 1}, {"2", "0", 1}}, f.k), MapError);
  CHECK_THROWS_AS(PAHomeo::from_prefix_table({{"0", "0", 1}, {"00", "2", 1}}, f.k), MapError);
  CHECK_THROWS_AS(fixtures::A1(fixtures::space(2)), MapError);
}

TEST_CASE("apply") {
  const auto& f = fx();
  CHECK(f.H(q("1/3")) == 1);
  CHECK(f.R(0) == 1);
  CHECK(f.A1(q("1/4")) == q("1/4"));
  CHECK(f.A1.branch_at(q("1/4")) == Branch{{0, q("1/3")}, q("1/9"), q("2/9")});
  CHECK_THROWS(f.H(q("1/2")));
  CHECK(invert(f.A1)(q("1/4")) == q("1/4"));
}

TEST_CASE("image") {
  const auto& f = fx();
  auto off22 = Region::cylinder(f.k, "22").complement();
  auto im = image(f.A1, off22);
  CHECK(im.same_as(Region::cylinder(f.k, "020").unite(Region::cylinder(f.k, "022"))));
  CHECK(im.subset_of(Region::cylinder(f.k, "02")));
  CHECK(image(f.R, Region::cylinder(f.k, "0")).same_as(Region::cylinder(f.k, "2")));
  auto s = Region(f.k, SpanUnion(Span{q("1/4"), q("7/9"), false, true}));
  CHECK(image(PAHomeo::identity(f.k), s).same_as(s));
}

TEST_CASE("group laws") {
  const auto& f = fx();
  CHECK(compose(f.H, f.H).is_identity());
  for (const auto* g : {&f.H, &f.R, &f.G3, &f.A1, &f.A2}) {
    CHECK(compose(*g, invert(*g)).is_identity());
    CHECK(compose(invert(*g), *g) == PAHomeo::identity(f.k));
    CHECK(invert(invert(*g)) == *g);
  }
  CHECK(invert(f.R) == f.R);
  CHECK(slopes(invert(f.G3)) == std::vector<Rational>{3, 1, q("1/3")});
  CHECK(compose(f.H, f.G3).label() == Word{"H", "G3"});
  CHECK(invert(compose(f.H, f.G3)).label() == Word{"G3^-1", "H^-1"});

  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    auto a = random_word(rng, 4), b = random_word(rng, 4), c = random_word(rng, 4);
    REQUIRE(compose(compose(a, b), c) == compose(a, compose(b, c)));
  }
}

TEST_CASE("break pairs") {
  const auto& f = fx();
  CHECK(break_pairs(f.G3).empty());
  CHECK(break_pairs(f.H) == std::vector<BreakPair>{{q("1/3"), q("2/3")}});
  CHECK(break_pairs(f.A1) == std::vector<BreakPair>{{q("7/9"), q("8/9")}, {q("25/27"), q("26/27")}});
  CHECK(break_pairs(compose(f.H, f.G3)) == std::vector<BreakPair>{{q("7/9"), q("8/9")}});
  for (const auto* g : {&f.H, &f.R, &f.G3, &f.A1, &f.A2})
    CHECK(break_pairs(*g) == gap_oracle(*g, 5, 8));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 40; ++i) {
    auto w = random_word(rng, 3);
    CHECK(break_pairs(w) == gap_oracle(w, 8, 14));
  }
}

TEST_CASE("break inclusion for compositions") {
  std::mt19937_64 rng(2);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    auto g = random_word(rng, 5), h = random_word(rng, 5);
    std::set<Rational> allowed;
    for (const auto& x : break_points(g)) allowed.insert(x);
    auto gi = invert(g);
    for (const auto& x : break_points(h)) allowed.insert(gi(x));
    for (const auto& x : break_points(compose(h, g)))
      if (!allowed.count(x)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("regular segments") {
  const auto& f = fx();
  CHECK(is_regular_on(f.G3, 0, 1));
  CHECK_FALSE(is_regular_on(f.H, q("1/3"), q("2/3")));
  CHECK(is_regular_on(f.H, 0, q("1/3")));
  CHECK_THROWS(is_regular_on(f.H, 1, 0));

  std::mt19937_64 rng(3);
  int checked = 0;
  while (checked < 1000) {
    auto w = random_word(rng, 5);
    Rational a = random_point(rng), b = random_point(rng);
    if (b < a) std::swap(a, b);
    if (!is_regular_on(w, a, b)) continue;
    ++checked;
    Rational fa = w(a), fb = w(b);
    if (fb < fa) std::swap(fa, fb);
    auto im = image(w, Region(f.k, SpanUnion(Span::closed(a, b))));
    REQUIRE(im.same_as(Region(f.k, SpanUnion(Span::closed(fa, fb)))));
  }
}

TEST_CASE("regularity radius") {
  const auto& f = fx();
  CHECK(regularity_radius({f.H}) == q("1/3"));
  CHECK_FALSE(regularity_radius({f.G3}));
  CHECK(regularity_radius({f.A1, f.A2}) == q("1/27"));
  CHECK_THROWS(regularity_radius({}));

  auto r0 = *regularity_radius(f.free_gens);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    Rational a = random_point(rng);
    Rational b = a + r0 * frac(static_cast<long>(rng() % 1000), 1000);
    for (const auto& g : f.free_gens) REQUIRE(is_regular_on(g, a, b));
  }
}

TEST_CASE("slopes and distortion") {
  const auto& f = fx();
  auto c0 = Region::cylinder(f.k, "0");
  CHECK(slope_range(f.G3, c0) == std::pair<Rational, Rational>{q("1/3"), q("1/3")});
  CHECK(slope_range(f.G3, Region::whole(f.k)) == std::pair<Rational, Rational>{q("1/3"), 3});
  CHECK(slope_range(f.A1, Region::cylinder(f.k, "222")) == std::pair<Rational, Rational>{9, 9});
  CHECK_THROWS(slope_range(f.A1, Region::none(f.k)));

  CHECK(distortion(f.G3, c0) == 1);
  CHECK(distortion(f.R, Region::whole(f.k)) == 1);
  auto dg = distortion(f.G3, Region::whole(f.k));
  REQUIRE(dg);
  // oracle: extreme quotients over depth-4 cell endpoint pairs
  std::vector<Rational> pts;
  for (const auto& c : f.k->cells(4)) {
    pts.push_back(c.lo);
    pts.push_back(c.hi);
  }
  Rational hi = 0, lo = 100;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      Rational v = abs(Rational((f.G3(pts[j]) - f.G3(pts[i])) / (pts[j] - pts[i])));
      hi = std::max(hi, v);
      lo = std::min(lo, v);
    }
  CHECK(*dg >= 9);
  CHECK(*dg == hi / lo);

  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    auto g = random_word(rng, 3), h = random_word(rng, 3);
    auto b = Region::cylinder(f.k, i % 2 ? "02" : "2");
    auto d_gh = distortion(compose(g, h), b), d_g = distortion(g, image(h, b)), d_h = distortion(h, b);
    if (d_gh && d_g && d_h) CHECK(*d_gh <= *d_g * *d_h);
    else CHECK((!d_g || !d_h));
  }
}

TEST_CASE("slope duality and chain rule") {
  const auto& f = fx();
  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    auto w = random_word(rng, 5);
    auto wi = invert(w);
    Rational x = random_point(rng);
    REQUIRE(abs(w.branch_at(x).slope) * abs(wi.branch_at(w(x)).slope) == 1);
    if (i % 10 == 0) {
      auto s = Region::cylinder(f.k, i % 20 ? "20" : "0");
      auto [lo, hi] = slope_range(w, s);
      auto [ilo, ihi] = slope_range(wi, image(w, s));
      CHECK(ilo == 1 / hi);
      CHECK(ihi == 1 / lo);
    }
  }
}

TEST_CASE("interval-union spaces") {
  auto k = share(make_compact_set({{0, 1}, {2, 3}}));
  auto swap = PAHomeo::make(k, {{{0, 1}, 1, 2}, {{2, 3}, 1, -2}}, {"S"});
  CHECK(swap(q("1/2")) == q("5/2"));
  CHECK(break_pairs(swap) == std::vector<BreakPair>{{1, 2}});
  CHECK(compose(swap, swap).is_identity());
  auto kink = PAHomeo::make(k, {{{0, q("1/2")}, q("1/2"), 0}, {{q("1/2"), 1}, q("3/2"), q("-1/2")}, {{2, 3}, 1, 0}});
  CHECK(kink(q("3/4")) == q("5/8"));
  CHECK(break_pairs(kink).empty());
  auto d = distortion(kink, Region::whole(k));
  REQUIRE(d);
  CHECK(*d == 3);
  CHECK_THROWS_AS(PAHomeo::make(k, {{{0, 1}, 2, 0}, {{2, 3}, 1, 0}}), MapError);
  CHECK_THROWS_AS(PAHomeo::make(k, {{{0, 1}, 1, 0}}), MapError);
}
