#pragma once

// Cell bookkeeping shared by the measure computations.

#include "kdyn/walk.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace kdyn::detail {

// Letter-index form of a prefix table.
struct Rule {
  std::vector<int> src, dst;
  int sign;
};

inline std::vector<Rule> rules_of(const PAHomeo& f) {
  const auto& alpha = f.space()->ifs()->alphabet;
  std::vector<Rule> out;
  for (const auto& r : f.prefix_table()) {
    Rule x{{}, {}, r.sign};
    for (char c : r.src) x.src.push_back(static_cast<int>(alpha.find(c)));
    for (char c : r.dst) x.dst.push_back(static_cast<int>(alpha.find(c)));
    out.push_back(std::move(x));
  }
  return out;
}

using Address = std::vector<int>;

// Image of the cylinder I_w under the map with the given rules, as cylinders.
inline std::vector<Address> image_addresses(const std::vector<Rule>& rules, const Address& w, int arity) {
  std::vector<Address> out;
  for (const auto& r : rules) {
    std::size_t common = std::min(r.src.size(), w.size());
    if (!std::equal(r.src.begin(), r.src.begin() + static_cast<long>(common), w.begin())) continue;
    if (r.src.size() <= w.size()) {
      Address a = r.dst;
      for (std::size_t i = r.src.size(); i < w.size(); ++i) a.push_back(r.sign > 0 ? w[i] : arity - 1 - w[i]);
      out.push_back(std::move(a));
      return out;
    }
    out.push_back(r.dst);
  }
  return out;
}

// Cell bookkeeping shared by the residual and entropy computations.
struct CellIndex {
  const CompactSet* k;
  int depth;
  int arity = 0;
  std::vector<Interval> cells;

  CellIndex(const CompactSet& space, int d) : k(&space), depth(d), cells(partition_cells(space, d)) {
    if (space.structured()) arity = static_cast<int>(space.ifs()->size());
  }

  Address address(std::size_t i, int d) const {
    Address a(static_cast<std::size_t>(d));
    for (int j = d; j-- > 0;) {
      a[static_cast<std::size_t>(j)] = static_cast<int>(i % static_cast<std::size_t>(arity));
      i /= static_cast<std::size_t>(arity);
    }
    return a;
  }

  // Range of depth-`depth` cells under the cylinder a.
  std::pair<std::size_t, std::size_t> block(const Address& a) const {
    std::size_t idx = 0;
    for (int c : a) idx = idx * static_cast<std::size_t>(arity) + static_cast<std::size_t>(c);
    std::size_t width = 1;
    for (std::size_t j = a.size(); j < static_cast<std::size_t>(depth); ++j) width *= static_cast<std::size_t>(arity);
    return {idx * width, idx * width + width};
  }

  // Cells (at this depth) making up h(C) for the level-d cell C with index i,
  // or nullopt when h(C) is not a union of such cells.
  std::optional<std::vector<std::pair<std::size_t, std::size_t>>> image_blocks(
      const PAHomeo& h, const std::vector<Rule>& rules, std::size_t i, int d) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    if (k->structured()) {
      for (const auto& a : image_addresses(rules, address(i, d), arity)) {
        if (static_cast<int>(a.size()) > depth) return std::nullopt;
        out.push_back(block(a));
      }
      return out;
    }
    auto img = image(h, Region(h.space(), SpanUnion(Span::closed(cells[i].lo, cells[i].hi))));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      Region c(h.space(), SpanUnion(Span::closed(cells[j].lo, cells[j].hi)));
      if (c.subset_of(img)) out.push_back({j, j + 1});
      else if (!c.disjoint_from(img)) return std::nullopt;
    }
    return out;
  }
};

template <class T>
T block_sum(const std::vector<T>& prefix, const std::vector<std::pair<std::size_t, std::size_t>>& blocks) {
  T s = 0;
  for (const auto& [a, b] : blocks) s += prefix[b] - prefix[a];
  return s;
}

template <class T>
std::vector<T> prefix_sums(const std::vector<T>& v) {
  std::vector<T> p(v.size() + 1, T(0));
  for (std::size_t i = 0; i < v.size(); ++i) p[i + 1] = p[i] + v[i];
  return p;
}

}  // namespace kdyn::detail
