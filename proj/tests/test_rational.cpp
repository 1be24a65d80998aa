#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <numeric>
#include <vector>

#include "powersdr/rational.hpp"

using powersdr::ChainRule;
using powersdr::Rational;

namespace {

// Oracle: smallest d >= 1 with 1/2 <= d*p < 1, found by exhaustive search
// in exact integer arithmetic (2*d*num >= den and d*num < den).
std::int64_t scaling_index_by_search(const Rational& p) {
  for (std::int64_t d = 1; d <= p.den; ++d) {
    if (2 * d * p.num >= p.den && d * p.num < p.den) return d;
  }
  return -1;
}

// Oracle: replay the chain rules with plain fraction arithmetic, reducing by
// hand with std::gcd. Independent of the Rational operators.
std::vector<std::pair<std::int64_t, std::int64_t>> chain_by_replay(
    std::int64_t num, std::int64_t den) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  while (true) {
    std::int64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
    out.emplace_back(num, den);
    if (2 * num == den) break;       // reached 1/2
    if (2 * num < den) {             // below 1/2: multiply by scaling index
      std::int64_t d = 1;
      while (!(2 * d * num >= den && d * num < den)) ++d;
      num *= d;
    } else {                         // above 1/2: p <- 2 - 1/p
      std::int64_t n2 = 2 * num - den;
      den = num;
      num = n2;
    }
  }
  return out;
}

std::vector<Rational> entries_of(const powersdr::ExponentChain& c) {
  return c.entries;
}

}  // namespace

TEST_CASE("make_rational normalizes sign and reduces") {
  Rational r = powersdr::make_rational(14, -21);
  CHECK(r.num == -2);
  CHECK(r.den == 3);
  CHECK(powersdr::make_rational(0, 5) == powersdr::make_rational(0, -9));
  CHECK(powersdr::make_rational(4, 2) == powersdr::make_rational(2, 1));
  CHECK_THROWS_AS(powersdr::make_rational(1, 0), std::domain_error);
}

TEST_CASE("rational arithmetic and ordering are exact") {
  Rational a = powersdr::make_rational(7, 11);
  Rational b = powersdr::make_rational(1, 2);
  CHECK(a - b == powersdr::make_rational(3, 22));
  CHECK(a * b == powersdr::make_rational(7, 22));
  CHECK(a / b == powersdr::make_rational(14, 11));
  CHECK(b < a);
  CHECK(powersdr::make_rational(-1, 3) < powersdr::make_rational(-1, 4));
  // 1/3 < 0.34 style traps: exact comparison of close fractions
  CHECK(powersdr::make_rational(33, 100) < powersdr::make_rational(1, 3));
  CHECK_THROWS_AS(a / powersdr::make_rational(0, 1), std::domain_error);
}

TEST_CASE("arithmetic overflow is detected, not wrapped") {
  Rational big = powersdr::make_rational(3037000500LL, 1);
  CHECK_THROWS_AS(big * big, std::overflow_error);
  Rational hugeden = powersdr::make_rational(1, 6074001000LL);
  CHECK_THROWS_AS(hugeden * hugeden, std::overflow_error);
}

TEST_CASE("rational parse/format round-trip") {
  CHECK(powersdr::to_string(powersdr::make_rational(7, 11)) == "7/11");
  CHECK(powersdr::to_string(powersdr::make_rational(-3, 4)) == "-3/4");
  CHECK(powersdr::to_string(powersdr::make_rational(2, 1)) == "2");
  CHECK(powersdr::parse_rational("7/11") == powersdr::make_rational(7, 11));
  CHECK(powersdr::parse_rational("-3/4") == powersdr::make_rational(-3, 4));
  CHECK(powersdr::parse_rational("2") == powersdr::make_rational(2, 1));
  CHECK(powersdr::parse_rational("-14/-21") == powersdr::make_rational(2, 3));
  CHECK_THROWS_AS(powersdr::parse_rational("1/0"), std::domain_error);
  CHECK_THROWS_AS(powersdr::parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(powersdr::parse_rational("1/2/3"), std::invalid_argument);
  CHECK_THROWS_AS(powersdr::parse_rational(""), std::invalid_argument);
}

TEST_CASE("conjugate exponent p -> 2 - 1/p") {
  auto conj = [](std::int64_t n, std::int64_t d) {
    return powersdr::conjugate_exponent(powersdr::make_rational(n, d));
  };
  CHECK(conj(2, 3) == powersdr::make_rational(1, 2));
  CHECK(conj(7, 11) == powersdr::make_rational(3, 7));
  CHECK(conj(5, 6) == powersdr::make_rational(4, 5));
  CHECK(conj(6, 7) == powersdr::make_rational(5, 6));
  CHECK(conj(3, 4) == powersdr::make_rational(2, 3));
  // domain is the open interval (1/2, 1)
  CHECK_THROWS_AS(powersdr::conjugate_exponent(powersdr::make_rational(1, 2)),
                  std::domain_error);
  CHECK_THROWS_AS(powersdr::conjugate_exponent(powersdr::make_rational(1, 1)),
                  std::domain_error);
  CHECK_THROWS_AS(powersdr::conjugate_exponent(powersdr::make_rational(1, 3)),
                  std::domain_error);
}

TEST_CASE("conjugate exponent strictly shrinks numerator and denominator") {
  for (std::int64_t den = 3; den <= 80; ++den) {
    for (std::int64_t num = den / 2 + 1; num < den; ++num) {
      if (std::gcd(num, den) != 1) continue;
      Rational p = powersdr::make_rational(num, den);
      Rational q = powersdr::conjugate_exponent(p);
      CHECK(q.num < p.num);
      CHECK(q.den < p.den);
      CHECK(q > powersdr::make_rational(0, 1));
      CHECK(q < powersdr::make_rational(1, 1));
    }
  }
}

TEST_CASE("scaling index matches exhaustive search") {
  CHECK(powersdr::scaling_index(powersdr::make_rational(2, 9)) == 3);
  CHECK(powersdr::scaling_index(powersdr::make_rational(1, 7)) == 4);
  CHECK(powersdr::scaling_index(powersdr::make_rational(3, 7)) == 2);
  CHECK(powersdr::scaling_index(powersdr::make_rational(1, 4)) == 2);
  for (std::int64_t den = 3; den <= 120; ++den) {
    for (std::int64_t num = 1; 2 * num < den; ++num) {
      if (std::gcd(num, den) != 1) continue;
      Rational p = powersdr::make_rational(num, den);
      std::int64_t d = powersdr::scaling_index(p);
      CHECK(d == scaling_index_by_search(p));
      CHECK(d >= 2);
      Rational dp = powersdr::make_rational(d, 1) * p;
      CHECK(dp >= powersdr::make_rational(1, 2));
      CHECK(dp < powersdr::make_rational(1, 1));
      CHECK(dp.den <= p.den);
    }
  }
  CHECK_THROWS_AS(powersdr::scaling_index(powersdr::make_rational(2, 3)),
                  std::domain_error);
  CHECK_THROWS_AS(powersdr::scaling_index(powersdr::make_rational(1, 2)),
                  std::domain_error);
}

TEST_CASE("exponent chain for 7/11") {
  auto chain = powersdr::build_chain(powersdr::make_rational(7, 11));
  std::vector<Rational> want = {
      powersdr::make_rational(7, 11), powersdr::make_rational(3, 7),
      powersdr::make_rational(6, 7),  powersdr::make_rational(5, 6),
      powersdr::make_rational(4, 5),  powersdr::make_rational(3, 4),
      powersdr::make_rational(2, 3),  powersdr::make_rational(1, 2)};
  CHECK(entries_of(chain) == want);
  std::vector<ChainRule> rules = {
      ChainRule::MoreThanHalf, ChainRule::LessThanHalf,
      ChainRule::MoreThanHalf, ChainRule::MoreThanHalf,
      ChainRule::MoreThanHalf, ChainRule::MoreThanHalf,
      ChainRule::MoreThanHalf, ChainRule::Terminal};
  CHECK(chain.rule_taken == rules);
}

TEST_CASE("exponent chain frozen cases") {
  auto chain35 = powersdr::build_chain(powersdr::make_rational(3, 5));
  std::vector<Rational> want35 = {
      powersdr::make_rational(3, 5), powersdr::make_rational(1, 3),
      powersdr::make_rational(2, 3), powersdr::make_rational(1, 2)};
  CHECK(entries_of(chain35) == want35);

  auto chain12 = powersdr::build_chain(powersdr::make_rational(1, 2));
  CHECK(chain12.entries.size() == 1);
  CHECK(chain12.rule_taken ==
        std::vector<ChainRule>{ChainRule::Terminal});

  CHECK_THROWS_AS(powersdr::build_chain(powersdr::make_rational(1, 1)),
                  std::domain_error);
  CHECK_THROWS_AS(powersdr::build_chain(powersdr::make_rational(0, 1)),
                  std::domain_error);
  CHECK_THROWS_AS(powersdr::build_chain(powersdr::make_rational(3, 2)),
                  std::domain_error);
}

TEST_CASE("exponent chains match rule replay for every den <= 60") {
  for (std::int64_t den = 2; den <= 60; ++den) {
    for (std::int64_t num = 1; num < den; ++num) {
      if (std::gcd(num, den) != 1) continue;
      Rational p = powersdr::make_rational(num, den);
      auto chain = powersdr::build_chain(p);
      auto want = chain_by_replay(num, den);
      REQUIRE(chain.entries.size() == want.size());
      REQUIRE(chain.entries.size() == chain.rule_taken.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(chain.entries[i].num == want[i].first);
        CHECK(chain.entries[i].den == want[i].second);
      }
      CHECK(chain.entries.size() <= static_cast<std::size_t>(2 * den));
      CHECK(chain.entries.front() == p);
      CHECK(chain.entries.back() == powersdr::make_rational(1, 2));
      CHECK(chain.rule_taken.back() == ChainRule::Terminal);
      // each step's rule is determined by which side of 1/2 the entry lies
      for (std::size_t i = 0; i + 1 < chain.entries.size(); ++i) {
        const Rational& q = chain.entries[i];
        if (q < powersdr::make_rational(1, 2)) {
          CHECK(chain.rule_taken[i] == ChainRule::LessThanHalf);
          CHECK(chain.entries[i + 1] ==
                powersdr::make_rational(powersdr::scaling_index(q), 1) * q);
        } else {
          CHECK(chain.rule_taken[i] == ChainRule::MoreThanHalf);
          CHECK(chain.entries[i + 1] == powersdr::conjugate_exponent(q));
        }
      }
    }
  }
}

TEST_CASE("reciprocal chain halves even and rounds up odd") {
  CHECK(powersdr::reciprocal_chain(14) ==
        std::vector<std::int64_t>{14, 7, 4, 2});
  CHECK(powersdr::reciprocal_chain(11) ==
        std::vector<std::int64_t>{11, 6, 3, 2});
  CHECK(powersdr::reciprocal_chain(2) == std::vector<std::int64_t>{2});
  CHECK(powersdr::reciprocal_chain(64) ==
        std::vector<std::int64_t>{64, 32, 16, 8, 4, 2});
  CHECK(powersdr::reciprocal_chain(3) == std::vector<std::int64_t>{3, 2});
  CHECK_THROWS_AS(powersdr::reciprocal_chain(1), std::domain_error);
  CHECK_THROWS_AS(powersdr::reciprocal_chain(0), std::domain_error);
}

TEST_CASE("reciprocal chain length is logarithmic") {
  for (std::int64_t m = 2; m <= 500; ++m) {
    auto c = powersdr::reciprocal_chain(m);
    CHECK(c.front() == m);
    CHECK(c.back() == 2);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
      std::int64_t next = (c[i] % 2 == 0) ? c[i] / 2 : (c[i] + 1) / 2;
      CHECK(c[i + 1] == next);
    }
    // ceil halving reaches 2 within log2(m)+2 steps
    CHECK(c.size() <= static_cast<std::size_t>(12));
  }
}
