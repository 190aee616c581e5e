#pragma once

#include "kdyn/lp.hpp"
#include "kdyn/walk.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kdyn {

// Generators together with their inverses, sorted by name: the search alphabet.
std::vector<PAHomeo> with_inverses(const std::vector<PAHomeo>& gens);

// ---------------------------------------------------------------- ping-pong

struct PingPongCertificate {
  PAHomeo a1, a2;
  Region A1, B1, A2, B2;
};

struct Verdict {
  bool ok = false;
  std::string reason;  // first violated condition
  explicit operator bool() const { return ok; }
};

Verdict verify_ping_pong(const PingPongCertificate& cert);

struct SanityReport {
  bool ok = true;
  std::size_t words_checked = 0;
  Word identity_word;  // a nontrivial reduced word equal to the identity, when found
};

// Every nontrivial reduced word of length ≤ L in a1^±, a2^± differs from the identity.
SanityReport free_group_sanity(const PAHomeo& a1, const PAHomeo& a2, int L);

// ---------------------------------------------------------------- displacement

struct DisplacementResult {
  std::optional<PAHomeo> g;
  bool finite_orbit = false;      // some point of A has a finite orbit
  bool budget_exhausted = false;
  std::string method;             // "search" or "induction"
};

// A word g over the generators and their inverses with g(A) ∩ B = ∅, shortest
// first and shortlex among words of equal length.
DisplacementResult find_displacement(const std::vector<PAHomeo>& gens, const PointSet& A, const PointSet& B,
                                     int max_len);

// ---------------------------------------------------------------- contraction

struct ContractionPair {
  PAHomeo g;
  PointSet A, B;
  Rational eps;
  std::size_t run = 0;
};

// g(K∖A^ε) ⊆ B^ε with |A| = |B| ≤ p_cap, checked exactly.
bool verify_contraction(const PAHomeo& g, const PointSet& A, const PointSet& B, const Rational& eps);

// Searches forward words of runs seeded model.seed + r, horizons 1..n_max.
std::optional<ContractionPair> find_contraction(const WalkModel& model, const Rational& eps, std::size_t p_cap,
                                                std::size_t n_max, std::size_t runs);

// The same search with A and B fixed.
std::optional<PAHomeo> find_contraction_for(const WalkModel& model, const PointSet& A, const PointSet& B,
                                            const Rational& eps, std::size_t n_max, std::size_t runs);

struct StabilizedPair {
  PointSet A, B;
  std::size_t a_clusters = 0, b_clusters = 0;
  bool p_mismatch = false;  // cluster counts differ from the common cardinality
};

// Pools each side over the list and clusters at the radius; every cluster is
// represented by its latest sample.
StabilizedPair stabilize_contraction_pair(const std::vector<std::pair<PointSet, PointSet>>& pairs,
                                          const Rational& radius);

struct Budgets {
  int max_len = 6;
  std::size_t runs = 100;
  int d_max = 6;
  std::size_t n_max = 40;
  std::size_t p_cap = 4;
};

struct FreePairResult {
  std::optional<PingPongCertificate> cert;
  std::string stage;  // stage reached: contraction, displacement, shrink, ping-pong, done
  std::string diagnostics;
  bool finite_orbit = false;
  Rational eps;  // final ε
};

FreePairResult assemble_free_pair(const WalkModel& model, const Rational& eps, const Budgets& budgets = {});

// ---------------------------------------------------------------- measures and orbits

struct FiniteOrbitCertificate {
  PointSet orbit;
  bool verified = false;
};

FiniteOrbitCertificate verify_finite_orbit(const std::vector<PAHomeo>& gens, const PointSet& orbit);

std::optional<FiniteOrbitCertificate> find_finite_orbit(const std::vector<PAHomeo>& gens,
                                                        const std::vector<Rational>& starts, std::size_t bound);

struct InvariantMeasureCertificate {
  int depth = 0;
  CellMeasure masses;  // exact
  int consistency_depth = 0;
};

struct MeasureSolve {
  std::optional<InvariantMeasureCertificate> cert;
  int depth = 0;                 // depth at which the system was posed
  std::vector<Rational> farkas;  // infeasibility certificate over the constraint rows
  Matrix rows;                   // the constraint system A μ = b ...
  std::vector<Rational> rhs;     // ... with μ ≥ 0
  std::vector<std::size_t> support;  // cells that some feasible measure charges
};

// Exact solve of μ(c) = μ(g(c)) for every generator or inverse g and every cell c
// of depth ≤ d whose image is a union of depth-d cells, with Σμ = 1 and μ ≥ 0.
MeasureSolve solve_invariant_measure(const std::vector<PAHomeo>& gens, int depth, int d_max = 6);

bool verify_invariant_measure(const std::vector<PAHomeo>& gens, const InvariantMeasureCertificate& cert);

// ---------------------------------------------------------------- Morse-Smale

struct PeriodicPoint {
  Rational x;
  int period = 0;
  Rational multiplier;
  bool operator==(const PeriodicPoint&) const = default;
};

struct PeriodicFamily {
  Interval domain;  // every point of K in it is periodic
  int period = 0;
};

struct PeriodicReport {
  std::vector<PeriodicPoint> points;  // sorted by x
  std::vector<PeriodicFamily> families;
  bool complete = true;  // false when the itinerary budget ran out
};

PeriodicReport periodic_points(const PAHomeo& f, int max_period, std::size_t node_budget = 1'000'000);

struct MorseSmaleCertificate {
  PAHomeo g;
  std::vector<PeriodicPoint> periodic;
  Region A, B;
};

struct MorseSmaleResult {
  std::optional<MorseSmaleCertificate> cert;
  std::string reason;
};

MorseSmaleResult check_morse_smale(const PAHomeo& f, const Region& A, const Region& B, int horizon = 6);

std::optional<MorseSmaleCertificate> find_morse_smale(const WalkModel& model, const Rational& eps,
                                                      std::size_t n_max, std::size_t runs);

}  // namespace kdyn
