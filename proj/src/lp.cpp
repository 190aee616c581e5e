#include "kdyn/lp.hpp"

#include <map>
#include <optional>
#include <stdexcept>

namespace kdyn {

namespace {

using Sparse = std::map<std::size_t, Rational>;

struct Reduced {
  std::vector<std::size_t> rows;  // an independent subset of the original rows
  std::optional<Sparse> conflict; // combination with zero left side and nonzero right side
};

// Selects a maximal independent set of rows, tracking the combination that
// produced each echelon row so that an inconsistency yields a certificate.
Reduced independent_rows(const Matrix& a, const std::vector<Rational>& b) {
  const std::size_t n = a.empty() ? 0 : a.front().size();
  struct Echelon {
    std::vector<Rational> row;
    Rational rhs;
    std::size_t pivot;
    Sparse combo;
  };
  std::vector<Echelon> basis;
  Reduced out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<Rational> row = a[i];
    Rational rhs = b[i];
    Sparse combo{{i, Rational(1)}};
    for (const auto& e : basis) {
      if (row[e.pivot] == 0) continue;
      Rational f = row[e.pivot] / e.row[e.pivot];
      for (std::size_t j = 0; j < n; ++j)
        if (e.row[j] != 0) row[j] -= f * e.row[j];
      rhs -= f * e.rhs;
      for (const auto& [k, v] : e.combo) {
        combo[k] -= f * v;
        if (combo[k] == 0) combo.erase(k);
      }
    }
    std::size_t pivot = n;
    for (std::size_t j = 0; j < n && pivot == n; ++j)
      if (row[j] != 0) pivot = j;
    if (pivot == n) {
      if (rhs != 0) {
        if (rhs < 0)
          for (auto& [k, v] : combo) v = -v;
        out.conflict = std::move(combo);
        return out;
      }
      continue;
    }
    basis.push_back({std::move(row), rhs, pivot, std::move(combo)});
    out.rows.push_back(i);
  }
  return out;
}

class Tableau {
 public:
  // rows: [A | I | b] with b ≥ 0; the identity block holds the artificials.
  Tableau(const Matrix& a, const std::vector<Rational>& b) : m_(a.size()), n_(a.empty() ? 0 : a.front().size()) {
    t_.assign(m_, std::vector<Rational>(n_ + m_ + 1, Rational(0)));
    for (std::size_t i = 0; i < m_; ++i) {
      bool flip = b[i] < 0;
      for (std::size_t j = 0; j < n_; ++j) t_[i][j] = flip ? Rational(-a[i][j]) : a[i][j];
      t_[i][n_ + i] = 1;
      t_[i].back() = flip ? Rational(-b[i]) : b[i];
      sign_.push_back(flip ? -1 : 1);
      basis_.push_back(n_ + i);
    }
  }

  // Minimises cost over the allowed columns; false when unbounded.
  bool optimise(const std::vector<Rational>& cost, std::size_t allowed) {
    for (;;) {
      auto r = reduced_costs(cost);
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed && enter == allowed; ++j)
        if (r[j] < 0) enter = j;
      if (enter == allowed) return true;
      std::size_t leave = m_;
      Rational best;
      for (std::size_t i = 0; i < m_; ++i) {
        if (!(t_[i][enter] > 0)) continue;
        Rational ratio = t_[i].back() / t_[i][enter];
        if (leave == m_ || ratio < best || (ratio == best && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

  std::vector<Rational> reduced_costs(const std::vector<Rational>& cost) const {
    std::vector<Rational> r(cost);
    for (std::size_t i = 0; i < m_; ++i) {
      const Rational& cb = cost[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j < r.size(); ++j)
        if (t_[i][j] != 0) r[j] -= cb * t_[i][j];
    }
    return r;
  }

  void pivot(std::size_t row, std::size_t col) {
    Rational p = t_[row][col];
    for (auto& v : t_[row]) v /= p;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == row || t_[i][col] == 0) continue;
      Rational f = t_[i][col];
      for (std::size_t j = 0; j < t_[i].size(); ++j)
        if (t_[row][j] != 0) t_[i][j] -= f * t_[row][j];
    }
    basis_[row] = col;
  }

  // Pivots zero-level artificials out of the basis where possible.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j)
        if (t_[i][j] != 0) {
          pivot(i, j);
          break;
        }
    }
  }

  std::vector<Rational> solution() const {
    std::vector<Rational> x(n_, Rational(0));
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) x[basis_[i]] = t_[i].back();
    return x;
  }

  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }
  int sign(std::size_t i) const { return sign_[i]; }

 private:
  std::size_t m_, n_;
  Matrix t_;
  std::vector<std::size_t> basis_;
  std::vector<int> sign_;
};

}  // namespace

LpResult solve_lp(const Matrix& a, const std::vector<Rational>& b, const std::vector<Rational>& c) {
  if (a.size() != b.size()) throw std::invalid_argument("solve_lp: row count mismatch");
  const std::size_t n = c.size();
  for (const auto& row : a)
    if (row.size() != n) throw std::invalid_argument("solve_lp: column count mismatch");

  LpResult res;
  auto red = independent_rows(a, b);
  if (red.conflict) {
    res.farkas.assign(a.size(), Rational(0));
    for (const auto& [k, v] : *red.conflict) res.farkas[k] = v;
    if (!check_farkas(a, b, res.farkas)) throw std::logic_error("solve_lp: invalid inconsistency certificate");
    return res;
  }
  Matrix ra;
  std::vector<Rational> rb;
  for (auto i : red.rows) {
    ra.push_back(a[i]);
    rb.push_back(b[i]);
  }
  Tableau t(ra, rb);
  const std::size_t m = t.rows();
  std::vector<Rational> phase1(n + m + 1, Rational(0));
  for (std::size_t i = 0; i < m; ++i) phase1[n + i] = 1;
  phase1.back() = 0;
  t.optimise(phase1, n + m);
  auto r = t.reduced_costs(phase1);
  // -r[last] is the phase-one optimum
  Rational infeas = -r.back();
  if (infeas > 0) {
    // duals y_i = 1 − r(artificial_i) on the sign-normalised rows
    res.farkas.assign(a.size(), Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
      Rational y = 1 - r[n + i];
      res.farkas[red.rows[i]] = t.sign(i) > 0 ? y : Rational(-y);
    }
    // phase one minimises; the dual certificate has yᵀA ≤ 0 and yᵀb > 0
    if (!check_farkas(a, b, res.farkas)) throw std::logic_error("solve_lp: invalid infeasibility certificate");
    return res;
  }
  t.expel_artificials();
  std::vector<Rational> phase2(n + m + 1, Rational(0));
  for (std::size_t j = 0; j < n; ++j) phase2[j] = c[j];
  if (!t.optimise(phase2, n)) {
    res.status = LpStatus::unbounded;
    return res;
  }
  res.status = LpStatus::optimal;
  res.x = t.solution();
  res.objective = 0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

bool check_farkas(const Matrix& a, const std::vector<Rational>& b, const std::vector<Rational>& y) {
  if (y.size() != a.size()) return false;
  const std::size_t n = a.empty() ? 0 : a.front().size();
  for (std::size_t j = 0; j < n; ++j) {
    Rational s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (y[i] != 0) s += y[i] * a[i][j];
    if (s > 0) return false;
  }
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += y[i] * b[i];
  return s > 0;
}

}  // namespace kdyn
