#include "kdyn/certify.hpp"

#include "cells.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>

namespace kdyn {

using detail::CellIndex;

namespace {

PAHomeo word_map(const std::vector<PAHomeo>& alphabet, const std::vector<std::size_t>& word, const Space& k) {
  PAHomeo g = PAHomeo::identity(k);
  for (auto it = word.rbegin(); it != word.rend(); ++it) g = compose(alphabet[*it], g);
  return g;
}

// Index of the inverse of each letter, or npos.
std::vector<std::size_t> inverse_letters(const std::vector<PAHomeo>& alphabet) {
  std::vector<std::size_t> inv(alphabet.size(), std::string::npos);
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    auto fi = invert(alphabet[i]);
    for (std::size_t j = 0; j < alphabet.size(); ++j)
      if (alphabet[j] == fi) {
        inv[i] = j;
        break;
      }
  }
  return inv;
}

bool disjoint_points(const std::vector<Rational>& a, const std::set<Rational>& b) {
  return std::none_of(a.begin(), a.end(), [&](const Rational& x) { return b.count(x) > 0; });
}

PointSet points_of(std::vector<Rational> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return PointSet::unchecked(std::move(v));
}

// Sorted relative to simplicity: candidate padding points of K.
std::vector<Rational> padding_candidates(const CompactSet& k) {
  std::vector<Rational> out;
  for (int d = 0; d <= 3; ++d)
    for (const auto& c : partition_cells(k, d)) {
      out.push_back(c.lo);
      out.push_back(c.hi);
    }
  std::vector<Rational> uniq;
  std::set<Rational> seen;
  for (const auto& x : out)
    if (seen.insert(x).second) uniq.push_back(x);
  return uniq;
}

void pad(std::vector<Rational>& pts, std::size_t p, const CompactSet& k) {
  for (const auto& x : padding_candidates(k)) {
    if (pts.size() >= p) break;
    if (std::find(pts.begin(), pts.end(), x) == pts.end()) pts.push_back(x);
  }
}

bool is_open_in(const Region& r) {
  const auto& k = *r.space();
  const Rational lo_k = k.min(), hi_k = k.max();
  for (const auto& s : r.set().spans()) {
    if (s.lo_closed && k.contains(s.lo) && s.lo != lo_k) {
      auto below = k.hull_of(Span{lo_k, s.lo, true, false});
      if (below && below->hi == s.lo) return false;
    }
    if (s.hi_closed && k.contains(s.hi) && s.hi != hi_k) {
      auto above = k.hull_of(Span{s.hi, hi_k, false, true});
      if (above && above->lo == s.hi) return false;
    }
  }
  return true;
}

}  // namespace

std::vector<PAHomeo> with_inverses(const std::vector<PAHomeo>& gens) {
  std::vector<PAHomeo> out;
  auto add = [&](const PAHomeo& f) {
    if (std::none_of(out.begin(), out.end(), [&](const PAHomeo& g) { return g == f; })) out.push_back(f);
  };
  for (const auto& g : gens) add(g);
  for (const auto& g : gens) add(invert(g));
  std::stable_sort(out.begin(), out.end(), [](const PAHomeo& a, const PAHomeo& b) { return a.label() < b.label(); });
  return out;
}

// ---------------------------------------------------------------- ping-pong

Verdict verify_ping_pong(const PingPongCertificate& c) {
  const auto& k = c.a1.space();
  for (const Region* r : {&c.A1, &c.B1, &c.A2, &c.B2})
    if (!(r->space() == k || *r->space() == *k)) throw std::invalid_argument("ping-pong region on another space");
  if (!(c.a2.space() == k || *c.a2.space() == *k)) throw std::invalid_argument("ping-pong maps on different spaces");
  const std::pair<const char*, const Region*> sets[] = {{"A1", &c.A1}, {"B1", &c.B1}, {"A2", &c.A2}, {"B2", &c.B2}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j)
      if (!sets[i].second->disjoint_from(*sets[j].second))
        return {false, std::string(sets[i].first) + " meets " + sets[j].first};
  if (!image(c.a1, c.A1.complement()).subset_of(c.B1)) return {false, "a1(K∖A1) ⊄ B1"};
  if (!image(c.a2, c.A2.complement()).subset_of(c.B2)) return {false, "a2(K∖A2) ⊄ B2"};
  return {true, ""};
}

SanityReport free_group_sanity(const PAHomeo& a1, const PAHomeo& a2, int L) {
  if (L < 1) throw std::invalid_argument("free_group_sanity: L < 1");
  const PAHomeo letters[4] = {a1, a2, invert(a1), invert(a2)};
  // a word moving one of these points is not the identity; otherwise the maps are compared
  std::vector<Rational> probes;
  for (const auto& c : partition_cells(*a1.space(), 3)) probes.insert(probes.end(), {c.lo, c.hi});
  SanityReport rep;
  std::vector<std::size_t> word;  // outermost letter last
  std::function<void(const std::vector<Rational>&)> rec = [&](const std::vector<Rational>& img) {
    if (!rep.ok) return;
    if (!word.empty()) {
      ++rep.words_checked;
      bool moved = false;
      for (std::size_t i = 0; i < probes.size() && !moved; ++i) moved = img[i] != probes[i];
      if (!moved) {
        PAHomeo g = PAHomeo::identity(a1.space());
        for (auto s : word) g = compose(letters[s], g);
        if (g.is_identity()) {
          rep.ok = false;
          rep.identity_word = g.label();
          return;
        }
      }
    }
    if (static_cast<int>(word.size()) == L) return;
    for (std::size_t s = 0; s < 4 && rep.ok; ++s) {
      if (!word.empty() && s == (word.back() + 2) % 4) continue;
      std::vector<Rational> next(img.size());
      for (std::size_t i = 0; i < img.size(); ++i) next[i] = letters[s].apply_unchecked(img[i]);
      word.push_back(s);
      rec(next);
      word.pop_back();
    }
  };
  rec(probes);
  return rep;
}

// ---------------------------------------------------------------- displacement

namespace {

struct WordSearch {
  std::vector<PAHomeo> alphabet;
  std::vector<std::size_t> inv;
  Space k;

  // Shortest, then shortlex-least word w with w(A) ∩ B = ∅.
  std::optional<std::vector<std::size_t>> search(const std::vector<Rational>& A, const std::set<Rational>& B,
                                                 int max_len) const {
    using Entry = std::pair<std::vector<std::size_t>, std::vector<Rational>>;
    std::vector<Entry> level{{{}, A}};
    std::set<std::vector<Rational>> seen{A};
    if (disjoint_points(A, B)) return std::vector<std::size_t>{};
    for (int len = 1; len <= max_len; ++len) {
      std::vector<Entry> next;
      for (const auto& [w, img] : level)
        for (std::size_t s = 0; s < alphabet.size(); ++s) {
          if (!w.empty() && inv[s] == w.front()) continue;
          std::vector<std::size_t> nw{s};
          nw.insert(nw.end(), w.begin(), w.end());
          std::vector<Rational> ni;
          for (const auto& x : img) ni.push_back(alphabet[s].apply_unchecked(x));
          next.emplace_back(std::move(nw), std::move(ni));
        }
      std::sort(next.begin(), next.end(), [](const Entry& a, const Entry& b) { return a.first < b.first; });
      level.clear();
      for (auto& e : next) {
        if (!seen.insert(e.second).second) continue;
        if (disjoint_points(e.second, B)) return e.first;
        level.push_back(std::move(e));
      }
      if (level.empty()) break;
    }
    return std::nullopt;
  }

  // True when the orbit of x closes up within `levels` letters.
  bool finite_orbit(const Rational& x, int levels) const {
    std::set<Rational> orbit{x};
    std::vector<Rational> frontier{x};
    for (int l = 0; l < levels && !frontier.empty(); ++l) {
      std::vector<Rational> next;
      for (const auto& y : frontier)
        for (const auto& s : alphabet) {
          Rational z = s.apply_unchecked(y);
          if (orbit.insert(z).second) next.push_back(z);
        }
      frontier = std::move(next);
    }
    return frontier.empty();
  }

  std::vector<Rational> apply(const std::vector<std::size_t>& w, std::vector<Rational> pts) const {
    for (auto it = w.rbegin(); it != w.rend(); ++it)
      for (auto& x : pts) x = alphabet[*it].apply_unchecked(x);
    return pts;
  }

  // Induction on |A|: pairwise disjoint displacements of A′ = A∖{a} away from B
  // until one of them also moves a off B. At most |B|+1 attempts.
  std::optional<std::vector<std::size_t>> induction(const std::vector<Rational>& A, const std::set<Rational>& B,
                                                    int max_len) const {
    if (A.size() == 1) return search(A, B, 2 * max_len);
    std::vector<Rational> rest(A.begin(), A.end() - 1);
    const Rational a = A.back();
    std::set<Rational> avoid = B;
    for (std::size_t attempt = 0; attempt <= B.size(); ++attempt) {
      auto h = induction(rest, avoid, max_len);
      if (!h) return std::nullopt;
      auto img = apply(*h, rest);
      if (!B.count(apply(*h, {a}).front())) return h;
      avoid.insert(img.begin(), img.end());
    }
    return std::nullopt;
  }
};

}  // namespace

DisplacementResult find_displacement(const std::vector<PAHomeo>& gens, const PointSet& A, const PointSet& B,
                                     int max_len) {
  if (A.empty() || B.empty()) throw std::invalid_argument("find_displacement: empty point set");
  if (max_len < 1) throw std::invalid_argument("find_displacement: max_len < 1");
  if (gens.empty()) throw std::invalid_argument("find_displacement: no generators");
  WordSearch ws{with_inverses(gens), {}, gens.front().space()};
  ws.inv = inverse_letters(ws.alphabet);
  std::set<Rational> bset(B.points().begin(), B.points().end());

  DisplacementResult res;
  if (auto w = ws.search(A.points(), bset, max_len)) {
    res.g = word_map(ws.alphabet, *w, ws.k);
    res.method = "search";
    return res;
  }
  for (const auto& x : A.points())
    if (ws.finite_orbit(x, max_len)) res.finite_orbit = true;
  if (res.finite_orbit) return res;
  if (auto w = ws.induction(A.points(), bset, max_len)) {
    res.g = word_map(ws.alphabet, *w, ws.k);
    res.method = "induction";
    return res;
  }
  res.budget_exhausted = true;
  return res;
}

// ---------------------------------------------------------------- contraction

bool verify_contraction(const PAHomeo& g, const PointSet& A, const PointSet& B, const Rational& eps) {
  const auto& k = g.space();
  Region rest = epsilon_neighborhood(A, eps, k).complement();
  return image(g, rest).subset_of(epsilon_neighborhood(B, eps, k));
}

namespace {

// Closed windows favour simple centres such as fixed points at the ends of K;
// open windows guarantee coverage of the pieces. Both are checked exactly.
std::optional<std::pair<PointSet, PointSet>> extract_pair(const PAHomeo& g, const Rational& eps, std::size_t p_cap,
                                                          bool closed) {
  const auto& k = *g.space();
  for (const Rational& theta : {eps, Rational(eps / 3), Rational(eps / 9)}) {
    std::vector<Interval> big, small;
    for (const auto& b : g.branches()) {
      if (b.image().length() >= theta) big.push_back(b.source);
      else small.push_back(b.image());
    }
    auto a = window_centers(k, big, eps, closed);
    auto b = window_centers(k, small, eps, closed);
    if ((!big.empty() && a.empty()) || (!small.empty() && b.empty())) continue;
    std::size_t p = std::max(a.size(), b.size());
    if (p == 0 || p > p_cap) continue;
    pad(a, p, k);
    pad(b, p, k);
    auto A = PointSet::make(k, a), B = PointSet::make(k, b);
    if (verify_contraction(g, A, B, eps)) return std::make_pair(A, B);
  }
  return std::nullopt;
}

}  // namespace

std::optional<ContractionPair> find_contraction(const WalkModel& model, const Rational& eps, std::size_t p_cap,
                                                std::size_t n_max, std::size_t runs) {
  if (!(eps > 0)) throw std::invalid_argument("find_contraction: eps must be positive");
  if (p_cap < 1) throw std::invalid_argument("find_contraction: p_cap < 1");
  auto shared = std::make_shared<const WalkModel>(model);
  if (model.size() == 1) runs = std::min<std::size_t>(runs, 1);
  for (std::size_t r = 0; r < runs; ++r) {
    Trajectory t(shared, model.seed() + r);
    for (bool closed : {true, false})
      for (std::size_t n = 1; n <= n_max; ++n) {
        const PAHomeo& g = t.forward_word(n);
        if (g.is_identity()) continue;
        if (auto ab = extract_pair(g, eps, p_cap, closed)) return ContractionPair{g, ab->first, ab->second, eps, r};
      }
  }
  return std::nullopt;
}

std::optional<PAHomeo> find_contraction_for(const WalkModel& model, const PointSet& A, const PointSet& B,
                                            const Rational& eps, std::size_t n_max, std::size_t runs) {
  auto shared = std::make_shared<const WalkModel>(model);
  if (model.size() == 1) runs = std::min<std::size_t>(runs, 1);
  const auto& k = model.space();
  Region rest = epsilon_neighborhood(A, eps, k).complement();
  Region target = epsilon_neighborhood(B, eps, k);
  for (std::size_t r = 0; r < runs; ++r) {
    Trajectory t(shared, model.seed() + r);
    for (std::size_t n = 1; n <= n_max; ++n) {
      const PAHomeo& g = t.forward_word(n);
      if (image(g, rest).subset_of(target)) return g;
    }
  }
  return std::nullopt;
}

StabilizedPair stabilize_contraction_pair(const std::vector<std::pair<PointSet, PointSet>>& pairs,
                                          const Rational& radius) {
  if (pairs.empty()) throw std::invalid_argument("stabilize_contraction_pair: empty list");
  const std::size_t p = pairs.front().first.size();
  for (const auto& [a, b] : pairs)
    if (a.size() != p || b.size() != p) throw std::invalid_argument("stabilize_contraction_pair: inconsistent cardinalities");
  auto side = [&](bool first, std::size_t& count) {
    std::vector<std::pair<Rational, std::size_t>> pool;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      for (const auto& x : (first ? pairs[i].first : pairs[i].second).points()) pool.emplace_back(x, i);
    std::sort(pool.begin(), pool.end());
    std::vector<Rational> reps;
    std::size_t latest = 0;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      bool fresh = j == 0 || pool[j].first - pool[j - 1].first > radius;
      if (fresh) {
        reps.push_back(pool[j].first);
        latest = pool[j].second;
      } else if (pool[j].second >= latest) {
        reps.back() = pool[j].first;
        latest = pool[j].second;
      }
    }
    count = reps.size();
    return points_of(std::move(reps));
  };
  StabilizedPair out;
  out.A = side(true, out.a_clusters);
  out.B = side(false, out.b_clusters);
  out.p_mismatch = out.a_clusters != p || out.b_clusters != p;
  return out;
}

FreePairResult assemble_free_pair(const WalkModel& model, const Rational& eps, const Budgets& budgets) {
  if (!(eps > 0)) throw std::invalid_argument("assemble_free_pair: eps must be positive");
  FreePairResult res;
  res.eps = eps;
  const auto& k = model.space();
  const auto& gens = model.maps();
  {
    std::vector<Rational> starts;
    for (const auto& c : partition_cells(*k, 1)) starts.insert(starts.end(), {c.lo, c.hi});
    res.finite_orbit = find_finite_orbit(gens, starts, 64).has_value();
  }

  res.stage = "contraction";
  auto cp = find_contraction(model, eps, budgets.p_cap, budgets.n_max, budgets.runs);
  if (!cp) {
    res.diagnostics = "no contracting word within budget";
    return res;
  }
  // stabilise over consecutive horizons of the same run
  std::vector<std::pair<PointSet, PointSet>> pairs{{cp->A, cp->B}};
  {
    Trajectory t(model, model.seed() + cp->run);
    std::size_t n = cp->g.label().size();
    for (std::size_t m = n + 1; m <= std::min(n + 2, budgets.n_max); ++m) {
      auto ab = extract_pair(t.forward_word(m), eps, budgets.p_cap, true);
      if (!ab) ab = extract_pair(t.forward_word(m), eps, budgets.p_cap, false);
      if (ab && ab->first.size() == cp->A.size() && ab->second.size() == cp->B.size()) pairs.push_back(*ab);
    }
  }
  PointSet A = cp->A, B = cp->B;
  PAHomeo g = cp->g;
  auto st = stabilize_contraction_pair(pairs, eps);
  if (!st.p_mismatch && !(st.A == A && st.B == B) && verify_contraction(g, st.A, st.B, eps)) {
    A = st.A;
    B = st.B;
  }

  res.stage = "displacement";
  auto u = find_displacement(gens, A, B, budgets.max_len);
  if (!u.g) {
    res.finite_orbit = res.finite_orbit || u.finite_orbit;
    res.diagnostics = u.finite_orbit ? "finite orbit blocks displacing A off B" : "no word moves A off B";
    return res;
  }
  std::vector<Rational> a1pts, b1pts = B.points();
  for (const auto& x : A.points()) a1pts.push_back(u.g->apply_unchecked(x));
  std::vector<Rational> both = a1pts;
  both.insert(both.end(), b1pts.begin(), b1pts.end());
  PointSet S = points_of(both);
  auto v = find_displacement(gens, S, S, budgets.max_len);
  if (!v.g) {
    res.finite_orbit = res.finite_orbit || v.finite_orbit;
    res.diagnostics = "no word moves A1 ∪ B1 off itself";
    return res;
  }

  res.stage = "shrink";
  Rational e = eps;
  std::optional<PingPongCertificate> cand;
  for (int i = 0; i < 12; ++i, e /= 3) {
    Region Ae = epsilon_neighborhood(A, e, k);
    Region A1 = image(*u.g, Ae), B1 = epsilon_neighborhood(B, e, k);
    Region A2 = image(*v.g, A1), B2 = image(*v.g, B1);
    const Region* rs[] = {&A1, &B1, &A2, &B2};
    bool ok = true;
    for (int x = 0; x < 4 && ok; ++x)
      for (int y = x + 1; y < 4 && ok; ++y) ok = rs[x]->disjoint_from(*rs[y]);
    if (!ok) continue;
    if (e != eps) {
      auto ge = find_contraction_for(model, A, B, e, budgets.n_max, budgets.runs);
      if (!ge) {
        res.eps = e;
        res.diagnostics = "no contracting word for the shrunken eps";
        return res;
      }
      g = *ge;
    }
    PAHomeo a1 = compose(g, invert(*u.g));
    PAHomeo a2 = compose(*v.g, compose(a1, invert(*v.g)));
    cand = PingPongCertificate{a1, a2, A1, B1, A2, B2};
    break;
  }
  res.eps = e;
  if (!cand) {
    res.diagnostics = "neighbourhoods stay overlapping";
    return res;
  }
  res.stage = "ping-pong";
  auto verdict = verify_ping_pong(*cand);
  if (!verdict) {
    res.diagnostics = verdict.reason;
    return res;
  }
  res.stage = "done";
  res.cert = std::move(cand);
  return res;
}

// ---------------------------------------------------------------- finite orbits

FiniteOrbitCertificate verify_finite_orbit(const std::vector<PAHomeo>& gens, const PointSet& orbit) {
  FiniteOrbitCertificate c{orbit, false};
  if (orbit.empty() || gens.empty()) return c;
  const auto& k = *gens.front().space();
  const auto& pts = orbit.points();
  for (const auto& x : pts)
    if (!k.contains(x)) return c;
  for (const auto& g : gens) {
    auto gi = invert(g);
    const PAHomeo* hs[] = {&g, &gi};
    for (const auto& x : pts)
      for (const PAHomeo* h : hs)
        if (!std::binary_search(pts.begin(), pts.end(), h->apply_unchecked(x))) return c;
  }
  c.verified = true;
  return c;
}

std::optional<FiniteOrbitCertificate> find_finite_orbit(const std::vector<PAHomeo>& gens,
                                                        const std::vector<Rational>& starts, std::size_t bound) {
  if (bound < 1) throw std::invalid_argument("find_finite_orbit: bound < 1");
  if (gens.empty()) throw std::invalid_argument("find_finite_orbit: no generators");
  auto alphabet = with_inverses(gens);
  for (const auto& x : starts) {
    if (!gens.front().space()->contains(x)) throw std::invalid_argument("find_finite_orbit: start not in K");
    std::set<Rational> orbit{x};
    std::vector<Rational> frontier{x};
    while (!frontier.empty() && orbit.size() <= bound) {
      std::vector<Rational> next;
      for (const auto& y : frontier)
        for (const auto& s : alphabet) {
          Rational z = s.apply_unchecked(y);
          if (orbit.insert(z).second) next.push_back(z);
        }
      frontier = std::move(next);
    }
    if (!frontier.empty()) continue;
    auto c = verify_finite_orbit(gens, PointSet::unchecked({orbit.begin(), orbit.end()}));
    if (c.verified) return c;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------- invariant measures

namespace {

struct System {
  Matrix rows;
  std::vector<Rational> rhs;
  std::size_t cells = 0;
};

System invariance_system(const std::vector<PAHomeo>& gens, int depth) {
  const auto& k = *gens.front().space();
  CellIndex idx(k, depth);
  System sys;
  sys.cells = idx.cells.size();
  std::set<std::vector<int>> seen;
  for (const auto& g : with_inverses(gens)) {
    auto rules = k.structured() ? detail::rules_of(g) : std::vector<detail::Rule>{};
    int top = k.structured() ? depth : 0;
    for (int level = 0; level <= top; ++level) {
      std::size_t n = k.structured() ? partition_cells(k, level).size() : sys.cells;
      for (std::size_t c = 0; c < n; ++c) {
        auto img = idx.image_blocks(g, rules, c, k.structured() ? level : depth);
        if (!img) continue;
        std::vector<int> row(sys.cells, 0);
        auto own = k.structured() ? idx.block(idx.address(c, level)) : std::pair<std::size_t, std::size_t>{c, c + 1};
        for (std::size_t j = own.first; j < own.second; ++j) row[j] += 1;
        for (const auto& [a, b] : *img)
          for (std::size_t j = a; j < b; ++j) row[j] -= 1;
        if (std::all_of(row.begin(), row.end(), [](int v) { return v == 0; })) continue;
        if (!seen.insert(row).second) continue;
        sys.rows.emplace_back(row.begin(), row.end());
        sys.rhs.push_back(0);
      }
    }
  }
  sys.rows.emplace_back(sys.cells, Rational(1));
  sys.rhs.push_back(1);
  return sys;
}

}  // namespace

MeasureSolve solve_invariant_measure(const std::vector<PAHomeo>& gens, int depth, int d_max) {
  if (gens.empty()) throw std::invalid_argument("solve_invariant_measure: no generators");
  if (depth < 0 || depth > d_max) throw std::invalid_argument("solve_invariant_measure: depth beyond d_max");
  const auto& k = *gens.front().space();
  MeasureSolve out;
  out.depth = depth;
  auto sys = invariance_system(gens, depth);
  out.rows = sys.rows;
  out.rhs = sys.rhs;
  std::vector<Rational> zero(sys.cells, Rational(0));
  auto lp = solve_lp(sys.rows, sys.rhs, zero);
  if (lp.status != LpStatus::optimal) {
    out.farkas = lp.farkas;
    return out;
  }
  for (std::size_t j = 0; j < sys.cells; ++j) {
    std::vector<Rational> c(sys.cells, Rational(0));
    c[j] = -1;
    auto r = solve_lp(sys.rows, sys.rhs, c);
    if (r.status == LpStatus::optimal && r.objective < 0) out.support.push_back(j);
  }
  InvariantMeasureCertificate cert;
  cert.depth = depth;
  cert.masses = CellMeasure::from_exact(depth, lp.x);
  cert.consistency_depth = depth;
  if (k.structured()) {
    for (int d = depth + 1; d <= d_max; ++d) {
      auto fine = invariance_system(gens, d);
      std::size_t width = fine.cells / sys.cells;
      for (std::size_t c = 0; c < sys.cells; ++c) {
        std::vector<Rational> row(fine.cells, Rational(0));
        for (std::size_t j = c * width; j < (c + 1) * width; ++j) row[j] = 1;
        fine.rows.push_back(std::move(row));
        fine.rhs.push_back(lp.x[c]);
      }
      if (solve_lp(fine.rows, fine.rhs, std::vector<Rational>(fine.cells, Rational(0))).status != LpStatus::optimal)
        break;
      cert.consistency_depth = d;
    }
  }
  out.cert = std::move(cert);
  return out;
}

bool verify_invariant_measure(const std::vector<PAHomeo>& gens, const InvariantMeasureCertificate& cert) {
  if (!cert.masses.exact) return false;
  const auto& mu = *cert.masses.exact;
  auto sys = invariance_system(gens, cert.depth);
  if (mu.size() != sys.cells) return false;
  for (const auto& m : mu)
    if (m < 0) return false;
  for (std::size_t i = 0; i < sys.rows.size(); ++i) {
    Rational s = 0;
    for (std::size_t j = 0; j < mu.size(); ++j) s += sys.rows[i][j] * mu[j];
    if (s != sys.rhs[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------- periodic points

PeriodicReport periodic_points(const PAHomeo& f, int max_period, std::size_t node_budget) {
  if (max_period < 1) throw std::invalid_argument("periodic_points: max_period < 1");
  const auto& k = *f.space();
  const auto& bs = f.branches();
  PeriodicReport rep;
  std::map<Rational, PeriodicPoint> found;
  std::size_t nodes = 0;

  auto minimal_period = [&](const Rational& x, int p) {
    Rational y = x;
    for (int j = 1; j <= p; ++j) {
      y = f.apply_unchecked(y);
      if (y == x) return j;
    }
    return 0;
  };

  // domain: points following the itinerary so far; x ↦ s·x + o on it
  std::function<void(Interval, Rational, Rational, int)> rec = [&](Interval dom, Rational s, Rational o, int p) {
    if (++nodes > node_budget) {
      rep.complete = false;
      return;
    }
    if (s != 1) {
      Rational x = o / (1 - s);
      if (dom.contains(x) && k.contains(x) && minimal_period(x, p) == p) found.emplace(x, PeriodicPoint{x, p, s});
    } else if (o == 0) {
      bool dup = std::any_of(rep.families.begin(), rep.families.end(), [&](const PeriodicFamily& fam) {
        return fam.domain.lo <= dom.lo && dom.hi <= fam.domain.hi;
      });
      if (!dup) rep.families.push_back({dom, p});
    }
    if (p == max_period) return;
    Rational ilo = s * dom.lo + o, ihi = s * dom.hi + o;
    if (ihi < ilo) std::swap(ilo, ihi);
    for (const auto& b : bs) {
      if (b.source.hi < ilo || b.source.lo > ihi) continue;
      // preimage of b's source under x ↦ s·x + o, within dom
      Rational plo = (b.source.lo - o) / s, phi = (b.source.hi - o) / s;
      if (phi < plo) std::swap(plo, phi);
      Interval nd{std::max(dom.lo, plo), std::min(dom.hi, phi)};
      if (nd.hi < nd.lo || !k.meets(Span::closed(nd.lo, nd.hi))) continue;
      rec(nd, b.slope * s, b.slope * o + b.offset, p + 1);
      if (!rep.complete) return;
    }
  };
  for (const auto& b : bs) {
    rec(b.source, b.slope, b.offset, 1);
    if (!rep.complete) break;
  }
  for (auto& [x, pp] : found) rep.points.push_back(pp);
  std::sort(rep.families.begin(), rep.families.end(),
            [](const PeriodicFamily& a, const PeriodicFamily& b) { return a.domain.lo < b.domain.lo; });
  return rep;
}

MorseSmaleResult check_morse_smale(const PAHomeo& f, const Region& A, const Region& B, int horizon) {
  if (!is_open_in(A) || !is_open_in(B)) throw std::invalid_argument("check_morse_smale: A and B must be open in K");
  MorseSmaleResult res;
  if (!A.disjoint_from(B)) {
    res.reason = "A and B intersect";
    return res;
  }
  Region offA = A.complement(), offB = B.complement();
  if (!offA.is_empty() && !(slope_range(f, offA).second < 1)) {
    res.reason = "|g'| ≥ 1 somewhere off A";
    return res;
  }
  if (!offB.is_empty() && !(slope_range(invert(f), offB).second < 1)) {
    res.reason = "|(g⁻¹)'| ≥ 1 somewhere off B";
    return res;
  }
  if (!image(f, offA).subset_of(B)) {
    res.reason = "g(K∖A) ⊄ B";
    return res;
  }
  auto pr = periodic_points(f, horizon);
  if (!pr.complete) {
    res.reason = "periodic enumeration budget exhausted";
    return res;
  }
  if (!pr.families.empty()) {
    res.reason = "non-hyperbolic family of periodic points";
    return res;
  }
  for (const auto& p : pr.points) {
    if (abs(p.multiplier) == 1) {
      res.reason = "non-hyperbolic periodic point " + to_string(p.x);
      return res;
    }
    if (!A.contains(p.x) && !B.contains(p.x)) {
      res.reason = "periodic point " + to_string(p.x) + " outside A ∪ B";
      return res;
    }
  }
  res.cert = MorseSmaleCertificate{f, pr.points, A, B};
  return res;
}

std::optional<MorseSmaleCertificate> find_morse_smale(const WalkModel& model, const Rational& eps,
                                                      std::size_t n_max, std::size_t runs) {
  if (!model.symmetric()) throw std::invalid_argument("find_morse_smale: the model must be symmetric");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("find_morse_smale: eps must lie in (0,1)");
  auto shared = std::make_shared<const WalkModel>(model);
  const auto& k = model.space();
  for (std::size_t r = 0; r < runs; ++r) {
    Trajectory t(shared, model.seed() + r);
    for (std::size_t n = 1; n <= n_max; ++n) {
      const PAHomeo& g = t.forward_word(n);
      if (g.is_identity()) continue;
      std::vector<Interval> expand, shrink;
      for (const auto& b : g.branches()) {
        if (abs(b.slope) >= 1) expand.push_back(b.source);
        if (abs(b.slope) <= 1) shrink.push_back(b.image());
      }
      for (Rational e = eps; e >= eps / 9; e /= 3) {
        auto a = window_centers(*k, expand, e), b = window_centers(*k, shrink, e);
        if ((!expand.empty() && a.empty()) || (!shrink.empty() && b.empty())) continue;
        Region A = epsilon_neighborhood(PointSet::make(*k, a), e, k);
        Region B = epsilon_neighborhood(PointSet::make(*k, b), e, k);
        if (!A.disjoint_from(B)) continue;
        auto res = check_morse_smale(g, A, B);
        if (res.cert) return res.cert;
      }
    }
  }
  return std::nullopt;
}

}  // namespace kdyn
