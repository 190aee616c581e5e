#include "kdyn/rational.hpp"

#include <cmath>

namespace kdyn {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw ParseError("empty rational");

  auto check_int = [&](const std::string& part, bool allow_sign) {
    std::size_t i = 0;
    if (allow_sign && i < part.size() && (part[i] == '-' || part[i] == '+')) ++i;
    if (i == part.size()) return false;
    for (; i < part.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(part[i]))) return false;
    return true;
  };

  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    bool neg = !whole.empty() && whole[0] == '-';
    if (!whole.empty() && (whole[0] == '-' || whole[0] == '+')) whole = whole.substr(1);
    if (whole.empty()) whole = "0";
    if (!check_int(whole, false) || (!frac.empty() && !check_int(frac, false)))
      throw ParseError("not a rational: " + s);
    mpz_class num(whole + frac, 10);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
    Rational q(num, den);
    q.canonicalize();
    return neg ? Rational(-q) : q;
  }

  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!num.empty() && num[0] == '+') num = num.substr(1);
  if (!check_int(num, true) || !check_int(den, false))
    throw ParseError("not a rational: " + s);
  mpz_class d(den, 10);
  if (d == 0) throw ParseError("zero denominator: " + s);
  Rational q(mpz_class(num, 10), d);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_str();
}

double to_double(const Rational& q) { return q.get_d(); }

double log_abs(const Rational& q) {
  auto lg = [](const mpz_class& z) {
    long exp = 0;
    double m = mpz_get_d_2exp(&exp, z.get_mpz_t());
    return std::log(std::fabs(m)) + static_cast<double>(exp) * std::log(2.0);
  };
  if (q == 0) return -HUGE_VAL;
  return lg(q.get_num()) - lg(q.get_den());
}

Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

Rational pow(const Rational& base, long exponent) {
  Rational b = exponent < 0 ? Rational(1 / base) : base;
  unsigned long e = static_cast<unsigned long>(exponent < 0 ? -exponent : exponent);
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), b.get_num().get_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), b.get_den().get_mpz_t(), e);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

namespace {

mpz_class floor_of(const Rational& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
  return f;
}

// Stern-Brocot descent for 0 <= lo < hi.
Rational simplest_nonneg(const Rational& lo, const Rational& hi) {
  mpz_class fl = floor_of(lo);
  if (Rational(fl + 1) < hi) return Rational(fl + 1);
  if (Rational(fl) == lo) {
    mpz_class k = floor_of(1 / (hi - fl)) + 1;
    return Rational(fl) + Rational(1) / Rational(k);
  }
  Rational y = simplest_nonneg(1 / (hi - fl), 1 / (lo - fl));
  return Rational(fl) + 1 / y;
}

}  // namespace

Rational simplest_between(const Rational& lo, const Rational& hi) {
  if (!(lo < hi)) throw std::invalid_argument("simplest_between: empty interval");
  if (lo < 0 && hi > 0) return 0;
  if (hi <= 0) return -simplest_nonneg(-hi, -lo);
  return simplest_nonneg(lo, hi);
}

Rational rational_below_exp(double x) {
  double v = std::exp(x);
  if (!(v > 0) || !std::isfinite(v)) throw std::domain_error("rational_below_exp: out of range");
  int e = 0;
  double m = std::frexp(v, &e);  // v = m * 2^e, m in [0.5, 1)
  long long mant = static_cast<long long>(std::floor(std::ldexp(m, 40)));
  Rational q(mpz_class(static_cast<long>(mant)));
  int shift = e - 40;
  if (shift >= 0) q *= pow(Rational(2), shift);
  else q /= pow(Rational(2), -shift);
  q.canonicalize();
  return q;
}

}  // namespace kdyn
