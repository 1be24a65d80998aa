#pragma once

// Exact real-root counting for the line-intersection test on the boundary
// curve y^t = x^s. Polynomials live over arbitrary-precision rationals so
// root multiplicity decisions are never floating-point guesses.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "powersdr/rational.hpp"

namespace powersdr {

using BigQ = boost::multiprecision::cpp_rational;
using Poly = std::vector<BigQ>;  // coefficient of x^i at index i

inline void poly_trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

// degree of the zero polynomial is -1
inline int poly_degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

inline Poly poly_derivative(const Poly& p) {
  Poly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * i);
  poly_trim(d);
  return d;
}

inline BigQ poly_eval(const Poly& p, const BigQ& x) {
  BigQ v = 0;
  for (std::size_t i = p.size(); i-- > 0;) v = v * x + p[i];
  return v;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, BigQ(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  poly_trim(c);
  return c;
}

inline Poly poly_pow(const Poly& a, int k) {
  Poly r = {BigQ(1)};
  for (int i = 0; i < k; ++i) r = poly_mul(r, a);
  return r;
}

inline std::pair<Poly, Poly> poly_divrem(const Poly& a, const Poly& b) {
  Poly r = a;
  poly_trim(r);
  Poly bb = b;
  poly_trim(bb);
  if (bb.empty()) throw std::domain_error("poly_divrem: division by zero");
  if (r.size() < bb.size()) return {{}, r};
  Poly q(r.size() - bb.size() + 1, BigQ(0));
  const BigQ& lead = bb.back();
  for (std::size_t shift = q.size(); shift-- > 0;) {
    if (r.size() < bb.size() + shift) continue;
    BigQ f = r[bb.size() - 1 + shift] / lead;
    if (f == 0) continue;
    q[shift] = f;
    for (std::size_t i = 0; i < bb.size(); ++i) r[i + shift] -= f * bb[i];
    r.resize(bb.size() - 1 + shift);
    poly_trim(r);
  }
  poly_trim(q);
  return {q, r};
}

// monic gcd (zero polynomial if both inputs are zero)
inline Poly poly_gcd(Poly a, Poly b) {
  poly_trim(a);
  poly_trim(b);
  while (!b.empty()) {
    Poly r = poly_divrem(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    BigQ lead = a.back();
    for (auto& c : a) c /= lead;
  }
  return a;
}

namespace detail {

inline int sign_of(const BigQ& v) { return v == 0 ? 0 : (v < 0 ? -1 : 1); }

inline int sign_variations_at_infinity(const std::vector<Poly>& chain,
                                       int dir) {
  int prev = 0, var = 0;
  for (const auto& q : chain) {
    if (q.empty()) continue;
    int s = sign_of(q.back());
    if (dir < 0 && poly_degree(q) % 2 == 1) s = -s;
    if (s != 0 && prev != 0 && s != prev) ++var;
    if (s != 0) prev = s;
  }
  return var;
}

}  // namespace detail

inline int count_distinct_real_roots(const Poly& pin) {
  Poly p = pin;
  poly_trim(p);
  if (p.empty())
    throw std::domain_error("count_distinct_real_roots: zero polynomial");
  if (poly_degree(p) == 0) return 0;
  Poly g = poly_gcd(p, poly_derivative(p));
  Poly sf = poly_degree(g) >= 1 ? poly_divrem(p, g).first : p;
  std::vector<Poly> chain = {sf, poly_derivative(sf)};
  while (poly_degree(chain.back()) >= 1) {
    Poly r = poly_divrem(chain[chain.size() - 2], chain.back()).second;
    for (auto& c : r) c = -c;
    poly_trim(r);
    if (r.empty()) break;
    chain.push_back(std::move(r));
  }
  return detail::sign_variations_at_infinity(chain, -1) -
         detail::sign_variations_at_infinity(chain, +1);
}

// Number of intersection points of the line through (1, 1/2) with the curve
// {y^t = x^s} union the axis {y = 0}, counted as distinct points. For odd t
// the curve is the graph x -> x^{s/t} (substitute the line's y); for even t
// (s odd, coprime) it is the graph y -> y^{t/s} (substitute the line's x).
// nullopt marks a degenerate configuration: a tangency, a collapsed
// polynomial, or an axis crossing landing exactly on the curve.
inline std::optional<int> line_test_count(int s, int t, const Rational& slope) {
  if (t < 1 || s < 0 || s > t)
    throw std::domain_error("line_test_count: need 0 <= s <= t, t >= 1");
  if (std::gcd(static_cast<std::int64_t>(s), static_cast<std::int64_t>(t)) != 1)
    throw std::domain_error("line_test_count: s/t must be in lowest terms");
  if (slope.num == 0)
    throw std::domain_error("line_test_count: slope must be nonzero");
  BigQ sig(slope.num, slope.den);
  Poly p;
  BigQ axis_point;  // parameter value of the axis crossing
  if (t % 2 == 1) {
    Poly line = {BigQ(1, 2) - sig, sig};  // y(x) = 1/2 + slope * (x - 1)
    p = poly_pow(line, t);
    if (static_cast<int>(p.size()) < s + 1) p.resize(s + 1, BigQ(0));
    p[s] -= 1;
    axis_point = 1 - BigQ(1) / (2 * sig);  // x with y(x) = 0
  } else {
    Poly xline = {1 - BigQ(1) / (2 * sig), BigQ(1) / sig};  // x(y)
    p = poly_pow(xline, s);
    if (static_cast<int>(p.size()) < t + 1) p.resize(t + 1, BigQ(0));
    p[t] -= 1;
    axis_point = 0;
  }
  poly_trim(p);
  if (poly_degree(p) < 1) return std::nullopt;
  if (poly_degree(poly_gcd(p, poly_derivative(p))) >= 1) return std::nullopt;
  if (poly_eval(p, axis_point) == 0) return std::nullopt;
  return count_distinct_real_roots(p) + 1;
}

// Runs the line test over every reduced s/t with t <= t_max and keeps the
// exponents whose count reaches the spectrahedron bound 1 + max(s, t).
// Indeterminate slopes are redrawn, never counted.
inline std::vector<Rational> spectrahedron_candidates(int t_max, int lines,
                                                      std::uint64_t seed) {
  std::vector<Rational> out;
  std::mt19937_64 g(seed);
  // Slopes of magnitude >= 1: for |slope| >= 1 > p a line through (1, 1/2)
  // that has passed above the branch of x^p near the origin stays above it
  // (the recapture minimum 1/2 + |m| - (1-p)(p/|m|)^{p/(1-p)} is positive),
  // so the intersection count is slope-independent on the whole grid.
  // Shallower lines can legitimately cut the flat branch twice more when p
  // is close to one.
  std::uniform_int_distribution<int> pick(0, 99);  // slopes in [-1.99, -1]
  for (int t = 1; t <= t_max; ++t)
    for (int s = 0; s <= t; ++s) {
      if (std::gcd(s, t) != 1) continue;
      bool candidate = true;
      for (int k = 0; k < lines && candidate; ++k) {
        std::optional<int> c;
        for (int attempt = 0; attempt < 32 && !c.has_value(); ++attempt)
          c = line_test_count(s, t, make_rational(-(100 + pick(g)), 100));
        if (!c.has_value())
          throw std::runtime_error("line test: persistent indeterminacy");
        candidate = *c == 1 + std::max(s, t);
      }
      if (candidate) out.push_back(make_rational(s, t));
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace powersdr
