#pragma once

#include "kdyn/rational.hpp"

#include <vector>

namespace kdyn {

using Matrix = std::vector<std::vector<Rational>>;

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<Rational> x;       // optimal point
  Rational objective;            // c·x at the optimum
  std::vector<Rational> farkas;  // y with yᵀA ≤ 0 and yᵀb > 0 when infeasible
};

// Minimises c·x subject to A x = b, x ≥ 0, exactly. Bland's rule; two phases.
LpResult solve_lp(const Matrix& a, const std::vector<Rational>& b, const std::vector<Rational>& c);

// Checks yᵀA ≤ 0 componentwise and yᵀb > 0.
bool check_farkas(const Matrix& a, const std::vector<Rational>& b, const std::vector<Rational>& y);

}  // namespace kdyn
