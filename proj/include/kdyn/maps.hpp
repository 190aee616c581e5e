#pragma once

#include "kdyn/space.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kdyn {

using Word = std::vector<std::string>;

// x -> slope * x + offset on source ∩ K.
struct Branch {
  Interval source;
  Rational slope;
  Rational offset;

  Rational operator()(const Rational& x) const { return slope * x + offset; }
  Interval image() const;
  bool operator==(const Branch& o) const = default;
};

struct PrefixRule {
  std::string src;
  std::string dst;
  int sign = 1;
  bool operator==(const PrefixRule& o) const = default;
};
using PrefixTable = std::vector<PrefixRule>;

class MapError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Piecewise-affine homeomorphism of K with finitely many branches. On IFS
// spaces every branch maps a cylinder onto a cylinder; on interval unions each
// branch lives inside one component. Branch lists are kept canonical, so two
// maps are equal exactly when their branch lists are.
class PAHomeo {
 public:
  static PAHomeo make(Space space, std::vector<Branch> branches, Word label = {});
  static PAHomeo identity(Space space);
  static PAHomeo from_prefix_table(const PrefixTable& table, Space space, Word label = {});
  // Skips the bijectivity check; used for results of compose/invert.
  static PAHomeo trusted(Space space, std::vector<Branch> branches, Word label);

  const Space& space() const { return space_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const Word& label() const { return label_; }
  PAHomeo with_label(Word label) const;

  Rational operator()(const Rational& x) const;
  Rational apply_unchecked(const Rational& x) const;
  const Branch& branch_at(const Rational& x) const;

  bool is_identity() const;
  PrefixTable prefix_table() const;

  bool operator==(const PAHomeo& o) const;

 private:
  Space space_;
  std::vector<Branch> branches_;
  Word label_;
};

Rational apply(const PAHomeo& f, const Rational& x);
Region image(const PAHomeo& f, const Region& s);
PAHomeo compose(const PAHomeo& f, const PAHomeo& g);  // f∘g
PAHomeo invert(const PAHomeo& f);
PAHomeo power(const PAHomeo& f, int n);
std::string inverse_name(const std::string& name);
Word inverse_word(const Word& w);

struct BreakPair {
  Rational a, b;
  bool operator==(const BreakPair& o) const = default;
};

std::vector<BreakPair> break_pairs(const PAHomeo& f);
std::vector<Rational> break_points(const PAHomeo& f);
bool is_regular_on(const PAHomeo& f, const Rational& a, const Rational& b);
// nullopt stands for an infinite radius (no break pair at all).
std::optional<Rational> regularity_radius(const std::vector<PAHomeo>& gens);
std::pair<Rational, Rational> slope_range(const PAHomeo& f, const Region& s);
// nullopt stands for infinite distortion.
std::optional<Rational> distortion(const PAHomeo& f, const Region& b);

}  // namespace kdyn
