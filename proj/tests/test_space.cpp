#include <doctest.h>

#include "kdyn/space.hpp"

#include <random>

using namespace kdyn;

namespace {

Rational q(const char* s) { return parse_rational(s); }

CompactSet random_set(std::mt19937_64& rng) {
  // endpoints on a 1/12 grid so every midpoint lands on the 1/24 grid
  std::uniform_int_distribution<int> count(1, 4), pos(0, 24);
  std::vector<Interval> iv;
  int n = count(rng);
  for (int i = 0; i < n; ++i) {
    int a = pos(rng), b = pos(rng);
    if (a > b) std::swap(a, b);
    iv.push_back({frac(a, 12), frac(b, 12)});
  }
  return CompactSet::from_intervals(iv);
}

// Brute force over the 1/24 grid points of a.
Rational grid_directed(const CompactSet& a, const CompactSet& b) {
  Rational best = 0;
  for (int n = 0; n <= 48; ++n) {
    Rational x = frac(n, 24);
    bool in_a = false;
    for (const auto& iv : a.intervals()) in_a = in_a || iv.contains(x);
    if (!in_a) continue;
    Rational d = -1;
    for (const auto& iv : b.intervals()) {
      Rational e = x < iv.lo ? Rational(iv.lo - x) : x > iv.hi ? Rational(x - iv.hi) : Rational(0);
      if (d < 0 || e < d) d = e;
    }
    best = std::max(best, d);
  }
  return best;
}

}  // namespace

TEST_CASE("rationals parse exactly") {
  CHECK(parse_rational("2/6") == Rational(1, 3));
  CHECK(parse_rational("-3/9") == Rational(-1, 3));
  CHECK(parse_rational("0.25") == Rational(1, 4));
  CHECK(parse_rational("7") == 7);
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK_THROWS_AS(parse_rational("x"), ParseError);
  CHECK_THROWS_AS(parse_rational("nan"), ParseError);
  CHECK(simplest_between(q("1/5"), q("1/3")) == Rational(1, 4));
  CHECK(simplest_between(q("-1/2"), q("1/2")) == 0);
  CHECK(simplest_between(q("3/4"), q("4/5")) == Rational(7, 9));
}

TEST_CASE("make_compact_set normalizes") {
  auto a = make_compact_set({{0, 1}});
  CHECK(a.intervals().size() == 1);
  auto b = make_compact_set({{0, Rational(1, 3)}, {Rational(1, 3), 1}});
  REQUIRE(b.intervals().size() == 1);
  CHECK(b.intervals()[0] == Interval{0, 1});
  auto c = make_compact_set({{Rational(2, 3), 1}, {0, Rational(1, 3)}});
  REQUIRE(c.intervals().size() == 2);
  CHECK(c.intervals()[0].lo == 0);
  CHECK(CompactSet::from_intervals(c.intervals()) == c);
  CHECK_THROWS(make_compact_set({}));
  CHECK_THROWS(make_compact_set({{1, 0}}));
}

TEST_CASE("ternary_cantor depths") {
  CHECK(ternary_cantor(0).intervals() == std::vector<Interval>{{0, 1}});
  CHECK(ternary_cantor(1).intervals() == std::vector<Interval>{{0, q("1/3")}, {q("2/3"), 1}});
  CHECK(ternary_cantor(2).intervals() ==
        std::vector<Interval>{{0, q("1/9")}, {q("2/9"), q("1/3")}, {q("2/3"), q("7/9")}, {q("8/9"), 1}});
  for (int d = 0; d < 6; ++d) {
    auto k = ternary_cantor(d);
    CHECK(k.intervals().size() == (1u << d));
    // one more IFS step applied to every cell
    std::vector<Interval> next;
    for (const auto& c : k.intervals()) {
      next.push_back({c.lo, c.lo + c.length() / 3});
      next.push_back({c.hi - c.length() / 3, c.hi});
    }
    CHECK(next == ternary_cantor(d + 1).intervals());
  }
}

TEST_CASE("membership in the limit set") {
  auto k = ternary_cantor(2);
  CHECK(k.contains(q("1/4")));
  CHECK(k.contains(q("3/4")));
  CHECK(k.contains(q("1/3")));
  CHECK(k.contains(q("1/10")));
  CHECK_FALSE(k.contains(q("1/2")));
  CHECK_FALSE(k.contains(q("4/27") + q("1/100")));
  CHECK(k.first_at_or_after(q("1/2")) == q("2/3"));
  CHECK(k.last_at_or_before(q("1/2")) == q("1/3"));
  CHECK(k.next_across_gap(q("1/3")) == q("2/3"));
  CHECK_FALSE(k.next_across_gap(q("1/4")));
  CHECK(k.is_gap(q("7/27"), q("8/27")));
  CHECK_FALSE(k.is_gap(0, q("2/9")));
}

TEST_CASE("gaps") {
  auto g1 = gaps(ternary_cantor(1));
  REQUIRE(g1.size() == 3);
  CHECK(g1[1].kind == GapKind::bounded);
  CHECK(*g1[1].left == q("1/3"));
  CHECK(*g1[1].right == q("2/3"));
  CHECK(g1[0].kind == GapKind::left_unbounded);
  CHECK(g1[2].kind == GapKind::right_unbounded);

  auto g2 = gaps(ternary_cantor(2));
  std::vector<std::pair<Rational, Rational>> bounded;
  for (const auto& g : g2)
    if (g.kind == GapKind::bounded) bounded.push_back({*g.left, *g.right});
  CHECK(bounded == std::vector<std::pair<Rational, Rational>>{
                       {q("1/9"), q("2/9")}, {q("1/3"), q("2/3")}, {q("7/9"), q("8/9")}});

  auto g0 = gaps(make_compact_set({{0, 1}}));
  CHECK(std::count_if(g0.begin(), g0.end(), [](const Gap& g) { return g.kind == GapKind::bounded; }) == 0);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    auto k = random_set(rng);
    auto gs = k.gaps();
    CHECK(std::count_if(gs.begin(), gs.end(), [](const Gap& g) { return g.kind == GapKind::bounded; }) ==
          static_cast<long>(k.intervals().size()) - 1);
    for (const auto& g : gs)
      if (g.kind == GapKind::bounded) CHECK(k.is_gap(*g.left, *g.right));
  }
}

TEST_CASE("epsilon neighborhoods are strict") {
  auto k = share(ternary_cantor(2));
  auto a = PointSet::make(*k, {0});
  auto n = epsilon_neighborhood(a, q("1/9"), k);
  CHECK_FALSE(n.contains(q("1/9")));
  CHECK(n.contains(0));
  CHECK(n.contains(q("1/27")));

  auto unit = share(make_compact_set({{0, 1}}));
  auto both = epsilon_neighborhood(PointSet::make(*unit, {0, 1}), 2, unit);
  CHECK(both.same_as(Region::whole(unit)));
  CHECK_THROWS(epsilon_neighborhood(a, 0, k));

  Rational prev = q("1/100");
  for (int i = 1; i <= 20; ++i) {
    Rational e = prev * q("5/4");
    auto small = epsilon_neighborhood(PointSet::make(*k, {q("1/4"), 1}), prev, k);
    auto big = epsilon_neighborhood(PointSet::make(*k, {q("1/4"), 1}), e, k);
    CHECK(small.subset_of(big));
    prev = e;
  }
}

TEST_CASE("regions on the Cantor set") {
  auto k = share(ternary_cantor(3));
  auto c22 = Region::cylinder(k, "22");
  auto left = Region(k, SpanUnion(Span::closed(0, q("1/2"))));
  CHECK(c22.disjoint_from(left));
  CHECK(Region(k, SpanUnion(Span::open(q("1/3"), q("2/3")))).is_empty());
  CHECK(Region::cylinder(k, "0").same_as(left));
  CHECK(c22.hull() == Interval{q("8/9"), 1});
  auto open_end = Region(k, SpanUnion(Span{q("1/3"), 1, false, true}));
  CHECK(open_end.hull() == Interval{q("2/3"), 1});
  auto accum = Region(k, SpanUnion(Span{q("1/4"), q("1/3"), false, true}));
  CHECK(accum.hull() == Interval{q("1/4"), q("1/3")});
  CHECK(c22.complement().same_as(Region::cylinder(k, "0").unite(Region::cylinder(k, "20"))));
}

TEST_CASE("hausdorff distance") {
  auto a = make_compact_set({{0, 1}});
  auto b = make_compact_set({{0, 0}});
  CHECK(hausdorff_distance(a, b) == 1);
  CHECK(hausdorff_distance(a, a) == 0);
  auto p = make_compact_set({{0, 0}, {1, 1}});
  auto r = make_compact_set({{q("1/3"), q("1/3")}, {q("2/3"), q("2/3")}});
  // brute force over the four pairs
  Rational brute = 0;
  for (const auto& x : {Rational(0), Rational(1)}) {
    Rational d = std::min(Rational(abs(x - q("1/3"))), Rational(abs(x - q("2/3"))));
    brute = std::max(brute, d);
  }
  CHECK(hausdorff_distance(p, r) == brute);
  CHECK(hausdorff_distance(p, r) == q("1/3"));

  std::mt19937_64 rng(11);
  std::vector<CompactSet> sets;
  for (int i = 0; i < 100; ++i) sets.push_back(random_set(rng));
  for (int i = 0; i < 100; ++i) {
    const auto& x = sets[i];
    const auto& y = sets[(i + 1) % 100];
    const auto& z = sets[(i + 7) % 100];
    Rational dxy = hausdorff_distance(x, y);
    CHECK(dxy == std::max(grid_directed(x, y), grid_directed(y, x)));
    CHECK(dxy == hausdorff_distance(y, x));
    CHECK((dxy == 0) == (x == y));
    CHECK(hausdorff_distance(x, z) <= dxy + hausdorff_distance(y, z));
  }
}

TEST_CASE("delta_m") {
  auto k = make_compact_set({{0, 1}});
  CHECK(delta_m(PointSet::make(k, {0, q("1/3"), 1})) == q("1/3"));
  CHECK_THROWS(PointSet::make(k, {0, 0}));
  auto pts = std::vector<Rational>{0, q("1/9"), q("2/9"), 1};
  Rational brute = 1;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (i != j) brute = std::min(brute, Rational(abs(pts[i] - pts[j])));
  CHECK(delta_m(PointSet::make(k, pts)) == brute);
  CHECK_THROWS(delta_m(PointSet::make(k, {0})));
  CHECK_THROWS(PointSet::make(ternary_cantor(2), {q("1/2")}));
}
