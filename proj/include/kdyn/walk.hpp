#pragma once

#include "kdyn/maps.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kdyn {

class WalkModel {
 public:
  // Each map is relabelled with its name. Probabilities must be positive and sum to 1.
  static WalkModel make(std::vector<std::string> names, std::vector<PAHomeo> maps,
                        std::vector<Rational> probs, std::uint64_t seed = 0);
  static WalkModel uniform(std::vector<std::string> names, std::vector<PAHomeo> maps, std::uint64_t seed = 0);

  const Space& space() const { return maps_.front().space(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<PAHomeo>& maps() const { return maps_; }
  const std::vector<PAHomeo>& inverses() const { return inverses_; }
  const std::vector<Rational>& probs() const { return probs_; }
  std::uint64_t seed() const { return seed_; }
  bool symmetric() const { return symmetric_; }
  std::size_t size() const { return maps_.size(); }

  WalkModel with_seed(std::uint64_t seed) const;
  // Generator index drawn for (seed, stream, step).
  std::size_t draw(std::uint64_t seed, std::uint64_t stream, std::uint64_t step) const;
  // Union of the break points of all generators.
  std::vector<Rational> break_set() const;

 private:
  std::vector<std::string> names_;
  std::vector<PAHomeo> maps_, inverses_;
  std::vector<Rational> probs_;
  std::vector<double> cumulative_;
  std::uint64_t seed_ = 0;
  bool symmetric_ = false;
};

// ω as a lazily generated index stream; forward and backward words are cached.
class Trajectory {
 public:
  Trajectory(std::shared_ptr<const WalkModel> model, std::uint64_t seed);
  Trajectory(const WalkModel& model, std::uint64_t seed);

  const WalkModel& model() const { return *model_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t step(std::size_t i) const;  // ω_i
  std::vector<std::size_t> prefix(std::size_t n) const;

  const PAHomeo& forward_word(std::size_t n);   // f_{n-1} ∘ … ∘ f_0
  const PAHomeo& backward_word(std::size_t n);  // f_0 ∘ … ∘ f_{n-1}
  // Orbit x, f_0 x, f_1 f_0 x, … (n+1 points).
  std::vector<Rational> orbit(const Rational& x, std::size_t n) const;
  // f̄^k x for k = 0..n.
  std::vector<Rational> backward_orbit(const Rational& x, std::size_t n) const;

 private:
  std::shared_ptr<const WalkModel> model_;
  std::uint64_t seed_;
  std::vector<PAHomeo> fwd_, bwd_;
};

PAHomeo forward_word(Trajectory& t, std::size_t n);
PAHomeo backward_word(Trajectory& t, std::size_t n);

// Cells are the depth-d cylinders of an IFS space, or the components of an
// interval-union space (depth is then ignored).
std::vector<Interval> partition_cells(const CompactSet& k, int depth);

struct CellMeasure {
  int depth = 0;
  std::vector<double> masses;
  std::optional<std::vector<Rational>> exact;

  static CellMeasure from_exact(int depth, std::vector<Rational> masses);
  double total() const;
};

CellMeasure estimate_stationary_measure(const WalkModel& model, std::size_t n_steps, int depth,
                                        std::size_t restarts = 1);

struct ResidualReport {
  double average = 0;    // max_c |μ(c) − Σ_s P(s) μ(s⁻¹c)|
  double generator = 0;  // max_{g,c} |μ(c) − μ(g⁻¹c)|
  std::optional<Rational> average_exact, generator_exact;
  std::size_t checked = 0;        // (generator, cell) constraints evaluated
  std::size_t cells_checked = 0;  // cells entering the averaged residual
  std::size_t skipped = 0;  // constraints not expressible at the measure's depth
};

// Constraints are stated for cells at cell_depth (default: the measure's depth) and
// evaluated with the measure's finer masses; a constraint whose preimage is not a
// union of measure cells is skipped.
ResidualReport invariance_residual(const CellMeasure& mu, const WalkModel& model, int cell_depth = -1);

// Aggregates masses onto the cells of a smaller depth.
CellMeasure coarsen(const CellMeasure& mu, const CompactSet& k, int depth);

struct EntropyReport {
  double h_estimate = 0;
  std::vector<double> per_generator;  // Σ_c μ(c) log(μ(c)/μ(s c)), the mean of −log J
  int depth = 0;                      // partition depth used
  std::size_t skipped_cells = 0;
  bool exact_zero = false;
};

EntropyReport estimate_entropy(const CellMeasure& mu, const WalkModel& model, int depth = -1);

enum class PairVerdict { synchronized, separated, undecided };
std::string to_string(PairVerdict v);

struct PairReport {
  PairVerdict verdict = PairVerdict::undecided;
  double slope = 0;  // fitted d log(distance) / dk over the last half
  Rational final_distance;
  std::vector<double> log_distance;
};

PairReport classify_pair(const Trajectory& t, const Rational& x, const Rational& y, const Rational& delta,
                         std::size_t n);

// Least-squares slope of ys against their indices, over [from, ys.size()).
double fit_slope(const std::vector<double>& ys, std::size_t from);

struct DichotomyReport {
  Rational delta;
  double lambda_fit = 0;  // mean decay rate of the synchronized pairs
  std::size_t synchronized = 0, separated = 0, undecided = 0;
  std::size_t horizon = 0;
};

// Pair i uses random points drawn with index i and the trajectory seeded model.seed + i.
DichotomyReport dichotomy(const WalkModel& model, std::size_t pairs, const Rational& delta, std::size_t n);

// A point of K drawn from (seed, stream, index): a random depth-12 cylinder
// endpoint, or a dyadic grid point of a random component.
Rational random_point(const CompactSet& k, std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

enum class CellKind { attractor, repulsor, undecided };
std::string to_string(CellKind k);

struct CellScan {
  Interval cell;
  CellKind kind = CellKind::undecided;
  double slope = 0;
  Rational final_diameter;
};

struct ScanReport {
  std::vector<CellScan> cells;
  Rational delta;
  std::size_t repulsors = 0;
  std::size_t attractors = 0;
  bool bound_holds = true;  // repulsors · δ ≤ diam K
};

ScanReport contraction_scan(const Trajectory& t, int depth, std::size_t n, const Rational& delta = Rational(1, 9));

struct Cluster {
  Rational lo, hi;
  std::size_t size = 0;
};

// Single linkage on sorted points: a new cluster starts after a gap > radius.
std::vector<Cluster> clusters(std::vector<Rational> points, const Rational& radius);

struct AccumulationReport {
  std::vector<Rational> points;  // Δ_n
  std::vector<Cluster> all_clusters;
  std::vector<Cluster> tail_clusters;  // preimages from steps n/2..n
  Rational radius;
  bool inclusion_verified = false;
};

AccumulationReport break_accumulation(Trajectory& t, std::size_t n, const Rational& radius = Rational(1, 27));

struct BackwardClusterReport {
  std::vector<std::size_t> counts;  // one per run
  std::size_t max_count = 0;
  Rational radius;
};

BackwardClusterReport backward_cluster(const WalkModel& model, const Rational& x, std::size_t n, std::size_t runs,
                                       const Rational& radius);

struct ProximalityReport {
  std::optional<std::size_t> m_estimate;
  std::vector<std::vector<Rational>> failures;  // sampled tuples without a synchronized pair, per last m tried
  std::size_t tuples_tested = 0;
  double delta_sum_mean = 0;
};

ProximalityReport proximality_degree(const WalkModel& model, std::size_t cap, std::size_t samples,
                                     std::size_t horizon);

struct DeltaSumReport {
  double mean = 0;
  double max = 0;
  double last_quarter_increment = 0;  // mean of Δ_m over the last quarter of steps
  std::vector<double> mean_partial_sums;
};

DeltaSumReport delta_sum_statistic(const WalkModel& model, const std::vector<Rational>& tuple, std::size_t n,
                                   std::size_t runs);

struct Ball {
  Rational center, radius;
};

struct ContractionReport {
  PointSet F;
  std::optional<std::size_t> p;  // nullopt when the cover failed
  double lambda_fit = 0;
  std::vector<Ball> cover;
  double sup_slope_off_F = 0;
  Rational eps;
  std::size_t horizon = 0;
  std::string diagnostics;
};

ContractionReport global_contraction_report(Trajectory& t, int depth, std::size_t n, const Rational& eps,
                                            std::size_t p_cap = 4);

// Groups the intervals (sorted) into windows narrower than 2·eps and picks in each
// window a point of K within distance < eps of all of it, preferring small denominators.
// With closed = true the distance may equal eps. Empty result on failure.
std::vector<Rational> window_centers(const CompactSet& k, std::vector<Interval> pieces, const Rational& eps,
                                     bool closed = false);
// Simplest point of K in (lo, hi), or in [lo, hi] when closed, searching denominators up to max_den.
std::optional<Rational> simple_point_in(const CompactSet& k, const Rational& lo, const Rational& hi,
                                        long max_den = 243, bool closed = false);

}  // namespace kdyn
