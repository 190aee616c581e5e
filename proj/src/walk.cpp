#include "kdyn/walk.hpp"

#include "cells.hpp"
#include "kdyn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace kdyn {

// ---------------------------------------------------------------- model

WalkModel WalkModel::make(std::vector<std::string> names, std::vector<PAHomeo> maps, std::vector<Rational> probs,
                          std::uint64_t seed) {
  if (maps.empty()) throw std::invalid_argument("walk model without generators");
  if (names.size() != maps.size() || probs.size() != maps.size())
    throw std::invalid_argument("names, maps and probabilities differ in length");
  std::set<std::string> uniq(names.begin(), names.end());
  if (uniq.size() != names.size()) throw std::invalid_argument("generator names must be unique");
  Rational sum = 0;
  for (const auto& p : probs) {
    if (!(p > 0)) throw std::invalid_argument("probabilities must be positive");
    sum += p;
  }
  if (sum != 1) throw std::invalid_argument("probabilities sum " + to_string(sum) + " ≠ 1");
  for (const auto& m : maps)
    if (!(m.space() == maps.front().space() || *m.space() == *maps.front().space()))
      throw std::invalid_argument("generators act on different spaces");

  WalkModel w;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    w.maps_.push_back(maps[i].with_label({names[i]}));
    w.inverses_.push_back(invert(w.maps_.back()));
  }
  w.names_ = std::move(names);
  w.probs_ = std::move(probs);
  w.seed_ = seed;
  double acc = 0;
  for (const auto& p : w.probs_) {
    acc += to_double(p);
    w.cumulative_.push_back(acc);
  }
  w.cumulative_.back() = 1.0;
  w.symmetric_ = true;
  for (std::size_t i = 0; i < w.size() && w.symmetric_; ++i) {
    bool found = false;
    for (std::size_t j = 0; j < w.size() && !found; ++j)
      found = w.probs_[j] == w.probs_[i] && w.maps_[j] == w.inverses_[i];
    w.symmetric_ = found;
  }
  return w;
}

WalkModel WalkModel::uniform(std::vector<std::string> names, std::vector<PAHomeo> maps, std::uint64_t seed) {
  std::vector<Rational> probs(maps.size(), frac(1, static_cast<long>(std::max<std::size_t>(1, maps.size()))));
  return make(std::move(names), std::move(maps), std::move(probs), seed);
}

WalkModel WalkModel::with_seed(std::uint64_t seed) const {
  WalkModel w = *this;
  w.seed_ = seed;
  return w;
}

std::size_t WalkModel::draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) const {
  double u = counter_uniform(seed, stream, step);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), size() - 1);
}

std::vector<Rational> WalkModel::break_set() const {
  std::vector<Rational> pts;
  for (const auto& m : maps_) {
    auto b = break_points(m);
    pts.insert(pts.end(), b.begin(), b.end());
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

// ---------------------------------------------------------------- trajectory

Trajectory::Trajectory(std::shared_ptr<const WalkModel> model, std::uint64_t seed)
    : model_(std::move(model)), seed_(seed) {
  fwd_.push_back(PAHomeo::identity(model_->space()));
  bwd_.push_back(fwd_.front());
}

Trajectory::Trajectory(const WalkModel& model, std::uint64_t seed)
    : Trajectory(std::make_shared<const WalkModel>(model), seed) {}

std::size_t Trajectory::step(std::size_t i) const { return model_->draw(seed_, 0, i); }

std::vector<std::size_t> Trajectory::prefix(std::size_t n) const {
  std::vector<std::size_t> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = step(i);
  return w;
}

const PAHomeo& Trajectory::forward_word(std::size_t n) {
  while (fwd_.size() <= n) fwd_.push_back(compose(model_->maps()[step(fwd_.size() - 1)], fwd_.back()));
  return fwd_[n];
}

const PAHomeo& Trajectory::backward_word(std::size_t n) {
  while (bwd_.size() <= n) bwd_.push_back(compose(bwd_.back(), model_->maps()[step(bwd_.size() - 1)]));
  return bwd_[n];
}

std::vector<Rational> Trajectory::orbit(const Rational& x, std::size_t n) const {
  std::vector<Rational> out{x};
  out.reserve(n + 1);
  for (std::size_t k = 0; k < n; ++k) out.push_back(model_->maps()[step(k)].apply_unchecked(out.back()));
  return out;
}

std::vector<Rational> Trajectory::backward_orbit(const Rational& x, std::size_t n) const {
  auto w = prefix(n);
  std::vector<Rational> out;
  out.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    Rational y = x;
    for (std::size_t j = k; j-- > 0;) y = model_->maps()[w[j]].apply_unchecked(y);
    out.push_back(y);
  }
  return out;
}

PAHomeo forward_word(Trajectory& t, std::size_t n) { return t.forward_word(n); }
PAHomeo backward_word(Trajectory& t, std::size_t n) { return t.backward_word(n); }

// ---------------------------------------------------------------- cells

std::vector<Interval> partition_cells(const CompactSet& k, int depth) {
  if (k.structured()) return k.cells(depth);
  return k.intervals();
}

CellMeasure CellMeasure::from_exact(int depth, std::vector<Rational> masses) {
  CellMeasure m;
  m.depth = depth;
  for (const auto& x : masses) m.masses.push_back(to_double(x));
  m.exact = std::move(masses);
  return m;
}

double CellMeasure::total() const { return std::accumulate(masses.begin(), masses.end(), 0.0); }

using namespace detail;

namespace {

// Symbolic point of an IFS Cantor set: a finite prefix followed by a periodic
// tail. Reflections toggle a global flip instead of rewriting letters.
class AddressChain {
 public:
  AddressChain(const Address& head, int tail_letter, int arity) : tail_{tail_letter}, arity_(arity) {
    for (auto it = head.rbegin(); it != head.rend(); ++it) rev_.push_back(*it);
  }

  int peek(std::size_t i) const {
    int s = i < rev_.size() ? rev_[rev_.size() - 1 - i] : tail_[(tail_pos_ + i - rev_.size()) % tail_.size()];
    return flip_ ? arity_ - 1 - s : s;
  }

  void apply(const std::vector<Rule>& rules) {
    for (const auto& r : rules) {
      bool match = true;
      for (std::size_t j = 0; j < r.src.size() && match; ++j) match = peek(j) == r.src[j];
      if (!match) continue;
      for (std::size_t j = 0; j < r.src.size(); ++j) pop();
      if (r.sign < 0) flip_ = !flip_;
      for (auto it = r.dst.rbegin(); it != r.dst.rend(); ++it) rev_.push_back(flip_ ? arity_ - 1 - *it : *it);
      return;
    }
    throw std::logic_error("prefix table does not cover the address");
  }

  std::size_t cell(int depth) const {
    std::size_t idx = 0;
    for (int j = 0; j < depth; ++j)
      idx = idx * static_cast<std::size_t>(arity_) + static_cast<std::size_t>(peek(static_cast<std::size_t>(j)));
    return idx;
  }

 private:
  void pop() {
    if (!rev_.empty()) rev_.pop_back();
    else tail_pos_ = (tail_pos_ + 1) % tail_.size();
  }

  std::vector<int> rev_;
  std::vector<int> tail_;
  std::size_t tail_pos_ = 0;
  bool flip_ = false;
  int arity_;
};

}  // namespace

CellMeasure estimate_stationary_measure(const WalkModel& model, std::size_t n_steps, int depth, std::size_t restarts) {
  if (n_steps < 1) throw std::invalid_argument("estimate_stationary_measure: n_steps < 1");
  if (restarts < 1) throw std::invalid_argument("estimate_stationary_measure: restarts < 1");
  const CompactSet& k = *model.space();
  CellIndex idx(k, depth);
  const std::size_t ncells = idx.cells.size();
  std::vector<std::uint64_t> counts(ncells, 0);

  if (k.structured()) {
    std::vector<std::vector<Rule>> rules;
    for (const auto& m : model.maps()) rules.push_back(rules_of(m));
    for (std::size_t r = 0; r < restarts; ++r) {
      std::size_t c = r % ncells;
      int tail = (r / ncells) % 2 ? idx.arity - 1 : 0;
      AddressChain x(idx.address(c, depth), tail, idx.arity);
      for (std::size_t s = 0; s < n_steps; ++s) {
        ++counts[x.cell(depth)];
        x.apply(rules[model.draw(model.seed(), r, s)]);
      }
    }
  } else {
    auto cell_of = [&](const Rational& x) {
      for (std::size_t i = 0; i < ncells; ++i)
        if (idx.cells[i].contains(x)) return i;
      throw std::logic_error("point left K");
    };
    for (std::size_t r = 0; r < restarts; ++r) {
      std::size_t c = r % ncells;
      Rational x = (r / ncells) % 2 ? idx.cells[c].hi : idx.cells[c].lo;
      for (std::size_t s = 0; s < n_steps; ++s) {
        ++counts[cell_of(x)];
        x = model.maps()[model.draw(model.seed(), r, s)].apply_unchecked(x);
      }
    }
  }
  CellMeasure mu;
  mu.depth = depth;
  double total = static_cast<double>(n_steps * restarts);
  for (auto c : counts) mu.masses.push_back(static_cast<double>(c) / total);
  return mu;
}

ResidualReport invariance_residual(const CellMeasure& mu, const WalkModel& model, int cell_depth) {
  const CompactSet& k = *model.space();
  CellIndex idx(k, mu.depth);
  if (idx.cells.size() != mu.masses.size()) throw std::invalid_argument("measure depth does not match the space");
  if (!k.structured() || cell_depth < 0) cell_depth = mu.depth;
  if (cell_depth > mu.depth) throw std::invalid_argument("cell depth exceeds the measure depth");
  std::vector<std::vector<Rule>> inv_rules;
  for (const auto& g : model.inverses()) inv_rules.push_back(k.structured() ? rules_of(g) : std::vector<Rule>{});
  const std::size_t ncells = k.structured() ? partition_cells(k, cell_depth).size() : idx.cells.size();
  auto own = [&](std::size_t c) {
    return k.structured() ? idx.block(idx.address(c, cell_depth)) : std::pair<std::size_t, std::size_t>{c, c + 1};
  };

  ResidualReport rep;
  auto pf = prefix_sums(mu.masses);
  std::optional<std::vector<Rational>> pq;
  if (mu.exact) {
    pq = prefix_sums(*mu.exact);
    rep.average_exact = 0;
    rep.generator_exact = 0;
  }
  for (std::size_t c = 0; c < ncells; ++c) {
    const double mc = block_sum(pf, {own(c)});
    const Rational mcq = pq ? block_sum(*pq, {own(c)}) : Rational(0);
    bool all = true;
    double avg = 0;
    Rational avg_q = 0;
    for (std::size_t g = 0; g < model.size(); ++g) {
      auto blocks = idx.image_blocks(model.inverses()[g], inv_rules[g], c, cell_depth);
      if (!blocks) {
        ++rep.skipped;
        all = false;
        continue;
      }
      ++rep.checked;
      double m = block_sum(pf, *blocks);
      rep.generator = std::max(rep.generator, std::fabs(mc - m));
      avg += to_double(model.probs()[g]) * m;
      if (pq) {
        Rational mq = block_sum(*pq, *blocks);
        Rational d = abs(Rational(mcq - mq));
        if (d > *rep.generator_exact) rep.generator_exact = d;
        avg_q += model.probs()[g] * mq;
      }
    }
    if (!all) continue;
    ++rep.cells_checked;
    rep.average = std::max(rep.average, std::fabs(mc - avg));
    if (pq) {
      Rational d = abs(Rational(mcq - avg_q));
      if (d > *rep.average_exact) rep.average_exact = d;
    }
  }
  if (pq) {
    rep.average = to_double(*rep.average_exact);
    rep.generator = to_double(*rep.generator_exact);
  }
  return rep;
}

CellMeasure coarsen(const CellMeasure& mu, const CompactSet& k, int depth) {
  if (!k.structured() || depth >= mu.depth) return mu;
  CellIndex idx(k, mu.depth);
  std::size_t n = partition_cells(k, depth).size();
  std::size_t width = mu.masses.size() / n;
  CellMeasure out;
  out.depth = depth;
  out.masses.assign(n, 0.0);
  for (std::size_t i = 0; i < mu.masses.size(); ++i) out.masses[i / width] += mu.masses[i];
  if (mu.exact) {
    out.exact = std::vector<Rational>(n, Rational(0));
    for (std::size_t i = 0; i < mu.masses.size(); ++i) (*out.exact)[i / width] += (*mu.exact)[i];
  }
  return out;
}

EntropyReport estimate_entropy(const CellMeasure& mu, const WalkModel& model, int depth) {
  const CompactSet& k = *model.space();
  CellIndex idx(k, mu.depth);
  if (idx.cells.size() != mu.masses.size()) throw std::invalid_argument("measure depth does not match the space");
  if (!(mu.total() > 0)) throw std::invalid_argument("estimate_entropy: measure has no mass");
  std::vector<std::vector<Rule>> rules;
  for (const auto& g : model.maps()) rules.push_back(k.structured() ? rules_of(g) : std::vector<Rule>{});

  auto level_cells = [&](int e) { return k.structured() ? partition_cells(k, e).size() : idx.cells.size(); };
  auto expressible = [&](int e) {
    for (std::size_t g = 0; g < model.size(); ++g)
      for (std::size_t c = 0; c < level_cells(e); ++c)
        if (!idx.image_blocks(model.maps()[g], rules[g], c, e)) return false;
    return true;
  };
  int e = depth;
  if (!k.structured()) e = mu.depth;
  else if (e < 0) {
    e = mu.depth;
    while (e > 0 && !expressible(e)) --e;
  } else if (e > mu.depth || !expressible(e)) {
    throw std::invalid_argument("entropy partition depth is not compatible with the measure");
  }

  EntropyReport rep;
  rep.depth = e;
  auto pf = prefix_sums(mu.masses);
  std::optional<std::vector<Rational>> pq;
  if (mu.exact) pq = prefix_sums(*mu.exact);
  bool all_equal = true;
  for (std::size_t g = 0; g < model.size(); ++g) {
    double term = 0;
    for (std::size_t c = 0; c < level_cells(e); ++c) {
      std::vector<std::pair<std::size_t, std::size_t>> own;
      if (k.structured()) own.push_back(idx.block(idx.address(c, e)));
      else own.push_back({c, c + 1});
      auto img = *idx.image_blocks(model.maps()[g], rules[g], c, e);
      double a = block_sum(pf, own), b = block_sum(pf, img);
      if (pq) all_equal = all_equal && block_sum(*pq, own) == block_sum(*pq, img);
      else all_equal = false;
      if (a <= 0) {
        ++rep.skipped_cells;
        continue;
      }
      if (b <= 0) {
        ++rep.skipped_cells;
        all_equal = false;
        continue;
      }
      term += a * std::log(a / b);
    }
    rep.per_generator.push_back(term);
  }
  rep.exact_zero = all_equal;
  for (std::size_t g = 0; g < model.size(); ++g) rep.h_estimate += to_double(model.probs()[g]) * rep.per_generator[g];
  if (rep.exact_zero) {
    rep.h_estimate = 0;
    std::fill(rep.per_generator.begin(), rep.per_generator.end(), 0.0);
  }
  return rep;
}

// ---------------------------------------------------------------- pairs and cells

std::string to_string(PairVerdict v) {
  switch (v) {
    case PairVerdict::synchronized: return "synchronized";
    case PairVerdict::separated: return "separated";
    default: return "undecided";
  }
}

std::string to_string(CellKind k) {
  switch (k) {
    case CellKind::attractor: return "attractor";
    case CellKind::repulsor: return "repulsor";
    default: return "undecided";
  }
}

double fit_slope(const std::vector<double>& ys, std::size_t from) {
  std::size_t n = ys.size() - std::min(from, ys.size());
  if (n < 2) return 0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = from; i < ys.size(); ++i) {
    double x = static_cast<double>(i), y = ys[i];
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  double dn = static_cast<double>(n);
  double den = dn * sxx - sx * sx;
  return den == 0 ? 0 : (dn * sxy - sx * sy) / den;
}

PairReport classify_pair(const Trajectory& t, const Rational& x, const Rational& y, const Rational& delta,
                         std::size_t n) {
  if (!(delta > 0)) throw std::invalid_argument("classify_pair: delta must be positive");
  if (n < 1) throw std::invalid_argument("classify_pair: n < 1");
  PairReport rep;
  if (x == y) {
    rep.verdict = PairVerdict::synchronized;
    rep.final_distance = 0;
    return rep;
  }
  auto ox = t.orbit(x, n), oy = t.orbit(y, n);
  std::vector<Rational> d(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    d[k] = abs(Rational(ox[k] - oy[k]));
    rep.log_distance.push_back(log_abs(d[k]));
  }
  std::size_t half = n / 2;
  rep.slope = fit_slope(rep.log_distance, half);
  rep.final_distance = d[n];
  bool far = std::all_of(d.begin() + static_cast<long>(half), d.end(), [&](const Rational& v) { return v >= delta; });
  if (rep.slope < -0.01 && d[n] < delta) rep.verdict = PairVerdict::synchronized;
  else if (far) rep.verdict = PairVerdict::separated;
  return rep;
}

Rational random_point(const CompactSet& k, std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::uint64_t h = counter_draw(seed, stream, index);
  if (k.structured()) {
    const auto& ifs = *k.ifs();
    std::string addr;
    for (int j = 0; j < 12; ++j) {
      addr.push_back(ifs.alphabet[h % ifs.size()]);
      h /= ifs.size();
    }
    Interval c = k.cylinder(addr);
    return h % 2 ? c.hi : c.lo;
  }
  const auto& comps = k.intervals();
  const Interval& c = comps[h % comps.size()];
  Rational t(static_cast<long>((h >> 32) & 0xFFFFF), 1L << 20);
  t.canonicalize();
  return c.lo + t * (c.hi - c.lo);
}

DichotomyReport dichotomy(const WalkModel& model, std::size_t pairs, const Rational& delta, std::size_t n) {
  auto shared = std::make_shared<const WalkModel>(model);
  DichotomyReport rep;
  rep.delta = delta;
  rep.horizon = n;
  double rate = 0;
  for (std::size_t i = 0; i < pairs; ++i) {
    Rational x = random_point(*model.space(), model.seed(), 2, 2 * i);
    Rational y = random_point(*model.space(), model.seed(), 2, 2 * i + 1);
    auto r = classify_pair(Trajectory(shared, model.seed() + i), x, y, delta, n);
    switch (r.verdict) {
      case PairVerdict::synchronized:
        ++rep.synchronized;
        rate -= r.slope;
        break;
      case PairVerdict::separated: ++rep.separated; break;
      default: ++rep.undecided;
    }
  }
  if (rep.synchronized) rep.lambda_fit = rate / static_cast<double>(rep.synchronized);
  return rep;
}

ScanReport contraction_scan(const Trajectory& t, int depth, std::size_t n, const Rational& delta) {
  if (depth < 1 && t.model().space()->structured()) throw std::invalid_argument("contraction_scan: depth < 1");
  if (n < 1) throw std::invalid_argument("contraction_scan: n < 1");
  const auto& space = t.model().space();
  auto word = t.prefix(n);
  ScanReport rep;
  rep.delta = delta;
  for (const auto& cell : partition_cells(*space, depth)) {
    Region r(space, SpanUnion(Span::closed(cell.lo, cell.hi)));
    std::vector<Rational> diam{r.diameter()};
    std::vector<double> logs{log_abs(diam.back())};
    for (std::size_t k = 0; k < n; ++k) {
      r = image(t.model().maps()[word[k]], r);
      diam.push_back(r.diameter());
      logs.push_back(log_abs(diam.back()));
    }
    CellScan cs{cell, CellKind::undecided, 0, diam.back()};
    std::size_t half = n / 2;
    if (diam.front() > 0) {
      cs.slope = fit_slope(logs, half);
      bool big = std::all_of(diam.begin() + static_cast<long>(half), diam.end(),
                             [&](const Rational& v) { return v >= delta; });
      bool convex = false;
      if (auto h = r.hull()) convex = Region(space, SpanUnion(Span::closed(h->lo, h->hi))).subset_of(r);
      if (cs.slope < -0.01 && diam.back() < delta) cs.kind = CellKind::attractor;
      else if (big && diam.back() > diam.front() && convex) cs.kind = CellKind::repulsor;
    }
    if (cs.kind == CellKind::attractor) ++rep.attractors;
    if (cs.kind == CellKind::repulsor) ++rep.repulsors;
    rep.cells.push_back(std::move(cs));
  }
  rep.bound_holds = Rational(static_cast<long>(rep.repulsors)) * delta <= space->diameter();
  return rep;
}

std::vector<Cluster> clusters(std::vector<Rational> points, const Rational& radius) {
  std::sort(points.begin(), points.end());
  std::vector<Cluster> out;
  for (const auto& p : points) {
    if (!out.empty() && p - out.back().hi <= radius) {
      out.back().hi = p;
      ++out.back().size;
    } else {
      out.push_back({p, p, 1});
    }
  }
  return out;
}

AccumulationReport break_accumulation(Trajectory& t, std::size_t n, const Rational& radius) {
  const auto& model = t.model();
  auto delta = model.break_set();
  auto word = t.prefix(n);
  std::vector<std::set<Rational>> levels(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    for (const auto& x : delta) {
      Rational y = x;
      for (std::size_t j = k; j-- > 0;) y = model.inverses()[word[j]].apply_unchecked(y);
      levels[k].insert(y);
    }
  AccumulationReport rep;
  rep.radius = radius;
  std::set<Rational> all, tail;
  for (std::size_t k = 0; k <= n; ++k) {
    all.insert(levels[k].begin(), levels[k].end());
    if (k >= n / 2) tail.insert(levels[k].begin(), levels[k].end());
  }
  rep.points.assign(all.begin(), all.end());
  rep.all_clusters = clusters(rep.points, radius);
  rep.tail_clusters = clusters(std::vector<Rational>(tail.begin(), tail.end()), radius);

  rep.inclusion_verified = true;
  std::set<Rational> upto;
  for (std::size_t k = 0; k <= n && rep.inclusion_verified; ++k) {
    upto.insert(levels[k].begin(), levels[k].end());
    for (const auto& p : break_points(t.forward_word(k)))
      if (!upto.count(p)) rep.inclusion_verified = false;
  }
  return rep;
}

BackwardClusterReport backward_cluster(const WalkModel& model, const Rational& x, std::size_t n, std::size_t runs,
                                       const Rational& radius) {
  if (n < 2) throw std::invalid_argument("backward_cluster: n < 2");
  if (runs < 1) throw std::invalid_argument("backward_cluster: runs < 1");
  if (!model.space()->contains(x)) throw std::invalid_argument("backward_cluster: point not in K");
  auto shared = std::make_shared<const WalkModel>(model);
  BackwardClusterReport rep;
  rep.radius = radius;
  for (std::size_t r = 0; r < runs; ++r) {
    Trajectory t(shared, model.seed() + r);
    auto pts = t.backward_orbit(x, n);
    std::vector<Rational> tail(pts.begin() + static_cast<long>(n / 2), pts.end());
    rep.counts.push_back(clusters(std::move(tail), radius).size());
    rep.max_count = std::max(rep.max_count, rep.counts.back());
  }
  return rep;
}

namespace {

double min_gap(std::vector<Rational> pts) {
  std::sort(pts.begin(), pts.end());
  Rational best = pts[1] - pts[0];
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) best = std::min(best, Rational(pts[i + 1] - pts[i]));
  return to_double(best);
}

std::vector<Rational> sample_points(const CompactSet& k) {
  std::set<Rational> pts;
  for (const auto& c : partition_cells(k, k.structured() ? 3 : 0)) {
    pts.insert(c.lo);
    pts.insert(c.hi);
  }
  return {pts.begin(), pts.end()};
}

}  // namespace

ProximalityReport proximality_degree(const WalkModel& model, std::size_t cap, std::size_t samples,
                                     std::size_t horizon) {
  if (cap < 2) throw std::invalid_argument("proximality_degree: cap < 2");
  auto shared = std::make_shared<const WalkModel>(model);
  auto pool = sample_points(*model.space());
  const Rational delta(1, 9);
  const std::size_t tries = 4;
  ProximalityReport rep;
  std::vector<std::vector<Rational>> tuples_m;
  for (std::size_t m = 2; m <= cap && m <= pool.size(); ++m) {
    rep.failures.clear();
    tuples_m.clear();
    for (std::size_t s = 0; s < samples; ++s) {
      std::vector<Rational> avail = pool, tuple;
      for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = counter_draw(model.seed(), 1000 + m, s * cap + i) % avail.size();
        tuple.push_back(avail[j]);
        avail.erase(avail.begin() + static_cast<long>(j));
      }
      bool hit = false;
      for (std::size_t tr = 0; tr < tries && !hit; ++tr) {
        Trajectory t(shared, model.seed() + 7919 * (s + 1) + tr);
        for (std::size_t a = 0; a < m && !hit; ++a)
          for (std::size_t b = a + 1; b < m && !hit; ++b)
            hit = classify_pair(t, tuple[a], tuple[b], delta, horizon).verdict == PairVerdict::synchronized;
      }
      ++rep.tuples_tested;
      if (!hit) rep.failures.push_back(tuple);
      tuples_m.push_back(std::move(tuple));
    }
    if (rep.failures.empty()) {
      rep.m_estimate = m;
      break;
    }
  }
  std::size_t used = std::min<std::size_t>(tuples_m.size(), 20);
  double acc = 0;
  for (std::size_t i = 0; i < used; ++i) acc += delta_sum_statistic(model, tuples_m[i], horizon, 1).mean;
  rep.delta_sum_mean = used ? acc / static_cast<double>(used) : 0;
  return rep;
}

DeltaSumReport delta_sum_statistic(const WalkModel& model, const std::vector<Rational>& tuple, std::size_t n,
                                   std::size_t runs) {
  if (tuple.size() < 2) throw std::invalid_argument("delta_sum_statistic: need at least two points");
  std::set<Rational> uniq(tuple.begin(), tuple.end());
  if (uniq.size() != tuple.size()) throw std::invalid_argument("delta_sum_statistic: duplicate points");
  if (runs < 1) throw std::invalid_argument("delta_sum_statistic: runs < 1");
  auto shared = std::make_shared<const WalkModel>(model);
  DeltaSumReport rep;
  rep.mean_partial_sums.assign(n + 1, 0.0);
  for (std::size_t r = 0; r < runs; ++r) {
    Trajectory t(shared, model.seed() + r);
    std::vector<std::vector<Rational>> orbits;
    for (const auto& x : tuple) orbits.push_back(t.backward_orbit(x, n));
    double s = 0;
    for (std::size_t k = 0; k <= n; ++k) {
      std::vector<Rational> pts;
      for (const auto& o : orbits) pts.push_back(o[k]);
      s += min_gap(std::move(pts));
      rep.mean_partial_sums[k] += s / static_cast<double>(runs);
    }
    rep.max = std::max(rep.max, s);
  }
  rep.mean = rep.mean_partial_sums[n];
  std::size_t q = std::max<std::size_t>(1, n / 4);
  rep.last_quarter_increment = (rep.mean_partial_sums[n] - rep.mean_partial_sums[n - q]) / static_cast<double>(q);
  return rep;
}

// ---------------------------------------------------------------- global contraction

std::optional<Rational> simple_point_in(const CompactSet& k, const Rational& lo, const Rational& hi, long max_den,
                                        bool closed) {
  if (closed ? hi < lo : !(lo < hi)) return std::nullopt;
  for (long den = 1; den <= max_den; ++den) {
    Rational a = lo * den, b = hi * den;
    mpz_class first, last;
    if (closed) {
      mpz_cdiv_q(first.get_mpz_t(), a.get_num().get_mpz_t(), a.get_den().get_mpz_t());
      mpz_fdiv_q(last.get_mpz_t(), b.get_num().get_mpz_t(), b.get_den().get_mpz_t());
    } else {
      mpz_fdiv_q(first.get_mpz_t(), a.get_num().get_mpz_t(), a.get_den().get_mpz_t());
      first += 1;
      mpz_cdiv_q(last.get_mpz_t(), b.get_num().get_mpz_t(), b.get_den().get_mpz_t());
      last -= 1;
    }
    for (mpz_class num = first; num <= last; ++num) {
      Rational cand(num, den);
      cand.canonicalize();
      if (cand.get_den() != den) continue;
      if (k.contains(cand)) return cand;
    }
  }
  return std::nullopt;
}

std::vector<Rational> window_centers(const CompactSet& k, std::vector<Interval> pieces, const Rational& eps,
                                     bool closed) {
  auto fits = [&](const Rational& width) { return closed ? width <= 2 * eps : width < 2 * eps; };
  std::sort(pieces.begin(), pieces.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  std::vector<Rational> out;
  std::size_t i = 0;
  while (i < pieces.size()) {
    Rational lo = pieces[i].lo, hi = pieces[i].hi;
    std::size_t j = i + 1;
    while (j < pieces.size() && fits(std::max(hi, pieces[j].hi) - lo)) {
      hi = std::max(hi, pieces[j].hi);
      ++j;
    }
    if (!fits(hi - lo)) return {};  // a single piece too wide for any window
    std::optional<Rational> c = simple_point_in(k, hi - eps, lo + eps, 243, closed);
    if (!c) {
      auto f = k.first_at_or_after((lo + hi) / 2);
      if (f && (closed ? *f <= lo + eps && *f >= hi - eps : *f < lo + eps && *f > hi - eps)) c = f;
    }
    if (!c) return {};
    out.push_back(*c);
    i = j;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Greedy cover of the closure of a region by closed balls of radius r.
std::vector<Ball> greedy_cover(const Region& img, const Rational& r, std::size_t limit) {
  std::vector<Ball> balls;
  const auto& k = *img.space();
  std::optional<Rational> start;
  auto next_point = [&](const std::optional<Rational>& after) -> std::optional<Rational> {
    std::optional<Rational> best;
    for (const auto& s : img.set().spans()) {
      Span piece = s;
      if (after) piece = intersect(s, Span{*after, s.hi > *after ? s.hi : *after, false, true});
      if (after && s.hi <= *after) continue;
      auto h = k.hull_of(piece);
      if (h && (!best || h->lo < *best)) best = h->lo;
    }
    return best;
  };
  auto x = next_point(std::nullopt);
  while (x && balls.size() <= limit) {
    balls.push_back({*x + r, r});
    x = next_point(*x + 2 * r);
  }
  return balls;
}

}  // namespace

ContractionReport global_contraction_report(Trajectory& t, int depth, std::size_t n, const Rational& eps,
                                            std::size_t p_cap) {
  if (!(eps > 0)) throw std::invalid_argument("global_contraction_report: eps must be positive");
  if (n < 1) throw std::invalid_argument("global_contraction_report: n < 1");
  const auto& space = t.model().space();
  ContractionReport rep;
  rep.eps = eps;
  rep.horizon = n;

  auto scan = contraction_scan(t, depth, n);
  double slope_sum = 0;
  std::size_t count = 0;
  for (const auto& c : scan.cells)
    if (c.kind == CellKind::attractor) {
      slope_sum += c.slope;
      ++count;
    }
  if (count == 0) {
    rep.diagnostics = "no contracting cell";
    return rep;
  }
  rep.lambda_fit = -slope_sum / static_cast<double>(count) / 2;
  if (!(rep.lambda_fit > 0)) {
    rep.diagnostics = "non-positive contraction rate";
    return rep;
  }
  Rational r = rational_below_exp(-static_cast<double>(n) * rep.lambda_fit);
  const PAHomeo& g = t.forward_word(n);

  std::vector<Interval> wide;
  for (const auto& b : g.branches())
    if (b.image().length() >= r) wide.push_back(b.source);
  auto centers = window_centers(*space, wide, eps);
  if (!wide.empty() && centers.empty()) {
    rep.diagnostics = "expanding branches do not cluster at scale eps";
    return rep;
  }
  rep.F = PointSet::make(*space, centers);
  if (rep.F.size() > p_cap) {
    rep.diagnostics = "too many exceptional points";
    return rep;
  }
  Region rest = epsilon_neighborhood(rep.F, eps, space).complement();
  if (rest.is_empty()) {
    rep.diagnostics = "F^eps covers K";
    return rep;
  }
  rep.sup_slope_off_F = to_double(slope_range(g, rest).second);
  auto img = image(g, rest);
  rep.cover = greedy_cover(img, r, p_cap);
  if (rep.cover.size() > p_cap) {
    rep.diagnostics = "cover needs more than p_cap balls";
    rep.cover.clear();
    return rep;
  }
  // the cover is re-checked independently of its construction
  std::vector<Span> balls;
  for (const auto& b : rep.cover) balls.push_back(Span::closed(b.center - b.radius, b.center + b.radius));
  if (!img.subset_of(Region(space, SpanUnion(std::move(balls))))) {
    rep.diagnostics = "cover verification failed";
    rep.cover.clear();
    return rep;
  }
  rep.p = rep.cover.size();
  return rep;
}

}  // namespace kdyn
