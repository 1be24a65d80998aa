#pragma once

// Exact rational exponents and the reduction chains that drive the lift
// construction. Everything here is int64-backed with overflow checks; the
// exponents that appear in practice stay tiny (denominators shrink along
// every chain).

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace powersdr {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;  // always > 0, gcd(num, den) == 1

  friend bool operator==(const Rational&, const Rational&) = default;
};

namespace detail {

inline std::int64_t checked_cast64(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN)
    throw std::overflow_error("rational arithmetic overflow");
  return static_cast<std::int64_t>(v);
}

}  // namespace detail

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = detail::checked_cast64(-static_cast<__int128>(num));
    den = detail::checked_cast64(-static_cast<__int128>(den));
  }
  std::int64_t g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

inline Rational operator+(const Rational& a, const Rational& b) {
  __int128 n = static_cast<__int128>(a.num) * b.den +
               static_cast<__int128>(b.num) * a.den;
  __int128 d = static_cast<__int128>(a.den) * b.den;
  return make_rational(detail::checked_cast64(n), detail::checked_cast64(d));
}

inline Rational operator-(const Rational& a, const Rational& b) {
  __int128 n = static_cast<__int128>(a.num) * b.den -
               static_cast<__int128>(b.num) * a.den;
  __int128 d = static_cast<__int128>(a.den) * b.den;
  return make_rational(detail::checked_cast64(n), detail::checked_cast64(d));
}

inline Rational operator*(const Rational& a, const Rational& b) {
  // cross-reduce first; keeps intermediates small
  std::int64_t g1 = std::gcd(a.num, b.den);
  std::int64_t g2 = std::gcd(b.num, a.den);
  __int128 n = static_cast<__int128>(a.num / g1) * (b.num / g2);
  __int128 d = static_cast<__int128>(a.den / g2) * (b.den / g1);
  return make_rational(detail::checked_cast64(n), detail::checked_cast64(d));
}

inline Rational operator/(const Rational& a, const Rational& b) {
  if (b.num == 0) throw std::domain_error("rational division by zero");
  return a * make_rational(b.den, b.num);
}

inline Rational operator-(const Rational& a) {
  return Rational{detail::checked_cast64(-static_cast<__int128>(a.num)),
                  a.den};
}

inline bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num) * b.den <
         static_cast<__int128>(b.num) * a.den;
}
inline bool operator>(const Rational& a, const Rational& b) { return b < a; }
inline bool operator<=(const Rational& a, const Rational& b) {
  return !(b < a);
}
inline bool operator>=(const Rational& a, const Rational& b) {
  return !(a < b);
}

inline double to_double(const Rational& a) {
  return static_cast<double>(a.num) / static_cast<double>(a.den);
}

inline std::string to_string(const Rational& a) {
  if (a.den == 1) return std::to_string(a.num);
  return std::to_string(a.num) + "/" + std::to_string(a.den);
}

inline Rational parse_rational(std::string_view s) {
  auto parse_int = [](std::string_view t) -> std::int64_t {
    if (t.empty()) throw std::invalid_argument("empty rational component");
    std::size_t pos = 0;
    std::int64_t v;
    try {
      v = std::stoll(std::string(t), &pos);
    } catch (const std::out_of_range&) {
      throw std::overflow_error("rational literal out of range");
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed rational: '" + std::string(t) +
                                  "'");
    }
    if (pos != t.size())
      throw std::invalid_argument("malformed rational: '" + std::string(t) +
                                  "'");
    return v;
  };
  std::size_t slash = s.find('/');
  if (slash == std::string_view::npos)
    return make_rational(parse_int(s), 1);
  if (s.find('/', slash + 1) != std::string_view::npos)
    throw std::invalid_argument("malformed rational: '" + std::string(s) +
                                "'");
  return make_rational(parse_int(s.substr(0, slash)),
                       parse_int(s.substr(slash + 1)));
}

// ---------------------------------------------------------------------------
// Exponent chains
// ---------------------------------------------------------------------------

enum class ChainRule { MoreThanHalf, LessThanHalf, Terminal };

// entries[0] = p, entries.back() = 1/2; rule_taken[i] is the rule applied to
// entries[i] to reach entries[i+1] (Terminal marks the last entry).
struct ExponentChain {
  std::vector<Rational> entries;
  std::vector<ChainRule> rule_taken;
};

// p' = 2 - 1/p, defined for 1/2 < p < 1. Strictly shrinks both numerator
// and denominator, which is what makes the chain finite.
inline Rational conjugate_exponent(const Rational& p) {
  if (!(p > make_rational(1, 2) && p < make_rational(1, 1)))
    throw std::domain_error("conjugate_exponent needs 1/2 < p < 1, got " +
                            to_string(p));
  return make_rational(detail::checked_cast64(
                           2 * static_cast<__int128>(p.num) - p.den),
                       p.num);
}

// Smallest d with 1/2 <= d*p < 1, for 0 < p < 1/2. Closed form
// d = ceil(den / (2 num)); the upper bound d*p < 1 then holds automatically
// but is verified anyway.
inline std::int64_t scaling_index(const Rational& p) {
  if (!(p > make_rational(0, 1) && p < make_rational(1, 2)))
    throw std::domain_error("scaling_index needs 0 < p < 1/2, got " +
                            to_string(p));
  std::int64_t d = (p.den + 2 * p.num - 1) / (2 * p.num);
  if (!(2 * d * p.num >= p.den && d * p.num < p.den))
    throw std::logic_error("scaling_index verification failed for " +
                           to_string(p));
  return d;
}

namespace detail {

struct RationalLess {
  bool operator()(const Rational& a, const Rational& b) const {
    return a < b;
  }
};

}  // namespace detail

// Reduction chain from p in (0,1) down to 1/2. Memoized per process.
inline const ExponentChain& build_chain(const Rational& p) {
  if (!(p > make_rational(0, 1) && p < make_rational(1, 1)))
    throw std::domain_error("build_chain needs 0 < p < 1, got " +
                            to_string(p));
  static std::mutex mu;
  static std::map<Rational, ExponentChain, detail::RationalLess> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;

  ExponentChain chain;
  Rational q = p;
  const Rational half = make_rational(1, 2);
  while (true) {
    chain.entries.push_back(q);
    if (q == half) {
      chain.rule_taken.push_back(ChainRule::Terminal);
      break;
    }
    if (q < half) {
      chain.rule_taken.push_back(ChainRule::LessThanHalf);
      q = make_rational(scaling_index(q), 1) * q;
    } else {
      chain.rule_taken.push_back(ChainRule::MoreThanHalf);
      q = conjugate_exponent(q);
    }
    if (chain.entries.size() > static_cast<std::size_t>(2 * p.den))
      throw std::logic_error("chain for " + to_string(p) +
                             " exceeded its length bound");
  }
  return cache.emplace(p, std::move(chain)).first->second;
}

// Reciprocal ladder m -> ceil(m/2) -> ... -> 2, for H_{1/m}.
inline const std::vector<std::int64_t>& reciprocal_chain(std::int64_t m) {
  if (m < 2) throw std::domain_error("reciprocal_chain needs m >= 2");
  static std::mutex mu;
  static std::map<std::int64_t, std::vector<std::int64_t>> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(m);
  if (it != cache.end()) return it->second;
  std::vector<std::int64_t> chain;
  for (std::int64_t k = m; ; k = (k % 2 == 0) ? k / 2 : (k + 1) / 2) {
    chain.push_back(k);
    if (k == 2) break;
  }
  return cache.emplace(m, std::move(chain)).first->second;
}

}  // namespace powersdr

template <>
struct std::hash<powersdr::Rational> {
  std::size_t operator()(const powersdr::Rational& r) const noexcept {
    std::size_t h = std::hash<std::int64_t>{}(r.num);
    return h ^ (std::hash<std::int64_t>{}(r.den) + 0x9e3779b97f4a7c15ULL +
                (h << 6) + (h >> 2));
  }
};
