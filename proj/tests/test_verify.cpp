#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "powersdr/verify.hpp"

using powersdr::make_rational;
using powersdr::Rational;
using powersdr::SdrLift;
using powersdr::SetKind;
using powersdr::SymMatrix;

namespace {

std::mt19937_64 rng_for(unsigned trial) {
  return std::mt19937_64(0xC0FFEEu + 101u * trial);
}

SymMatrix random_pd(int n, std::mt19937_64& g, double ridge = 0.3) {
  std::normal_distribution<double> dist;
  powersdr::Mat r = powersdr::Mat::zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.at(i, j) = dist(g);
  SymMatrix x = SymMatrix::from_mat(
      powersdr::matmul(powersdr::transpose(r), r), true);
  for (int i = 0; i < n; ++i) x.set(i, i, x(i, i) + ridge);
  return x;
}

}  // namespace

TEST_CASE("member oracle reference points") {
  SymMatrix x = SymMatrix::from_rows({{4, 0}, {0, 1}});
  SymMatrix y = SymMatrix::from_rows({{2, 0}, {0, 1}});
  CHECK(powersdr::member_oracle(make_rational(1, 2), SetKind::Hypograph, x, y,
                                1e-8));
  SymMatrix i2 = SymMatrix::identity(2);
  CHECK_FALSE(powersdr::member_oracle(make_rational(1, 2), SetKind::Hypograph,
                                      i2, 1.1 * i2, 1e-8));
  // clipped near-boundary member for a long-chain exponent
  auto g = rng_for(3);
  SymMatrix xr = random_pd(3, g);
  SymMatrix xp = powersdr::matrix_power(xr, make_rational(7, 11));
  SymMatrix yr = xp - 1e-3 * SymMatrix::identity(3);
  CHECK(powersdr::member_oracle(make_rational(7, 11), SetKind::Hypograph, xr,
                                yr, 1e-8));
  // negative exponents demand a definite X
  SymMatrix sing = SymMatrix::from_rows({{1, 0}, {0, 0}});
  CHECK_FALSE(powersdr::member_oracle(make_rational(-1, 2), SetKind::Epigraph,
                                      sing, i2, 1e-8));
}

TEST_CASE("exact midpoint counterexample") {
  auto c = powersdr::multivariate_counterexample();
  CHECK(c.z.a11 == make_rational(5, 2));
  CHECK(c.z.a12 == make_rational(1, 2));
  CHECK(c.z.a22 == make_rational(197, 128));
  CHECK(c.e.a11 == make_rational(5, 2));
  CHECK(c.e.a12 == make_rational(517, 256));
  CHECK(c.e.a22 == make_rational(26521, 16384));
  CHECK(c.det == make_rational(-2079, 65536));
  CHECK_FALSE(c.psd);
}

TEST_CASE("scalar interval oracle equals the scalar power") {
  const SdrLift& h = powersdr::build(make_rational(1, 2), SetKind::Hypograph);
  CHECK(powersdr::scalar_max_y(h, 4.0) == Catch::Approx(2.0).epsilon(1e-12));

  const SdrLift& h711 =
      powersdr::build(make_rational(7, 11), SetKind::Hypograph);
  CHECK(powersdr::scalar_max_y(h711, 2.0) ==
        Catch::Approx(std::pow(2.0, 7.0 / 11.0)).epsilon(1e-10));

  const SdrLift& e32 = powersdr::build(make_rational(3, 2), SetKind::Epigraph);
  CHECK(powersdr::scalar_max_y(e32, 4.0) == Catch::Approx(8.0).epsilon(1e-10));

  const SdrLift& em12 =
      powersdr::build(make_rational(-1, 2), SetKind::Epigraph);
  CHECK(powersdr::scalar_max_y(em12, 4.0) ==
        Catch::Approx(0.5).epsilon(1e-10));

  // endpoints
  CHECK(powersdr::scalar_max_y(
            powersdr::build(make_rational(1, 1), SetKind::Hypograph), 3.0) ==
        Catch::Approx(3.0));
  CHECK(powersdr::scalar_max_y(
            powersdr::build(make_rational(0, 1), SetKind::Hypograph), 9.0) ==
        Catch::Approx(1.0));
  CHECK(powersdr::scalar_max_y(
            powersdr::build(make_rational(2, 1), SetKind::Epigraph), 3.0) ==
        Catch::Approx(9.0));
  CHECK(powersdr::scalar_max_y(
            powersdr::build(make_rational(-1, 1), SetKind::Epigraph), 4.0) ==
        Catch::Approx(0.25));

  // grid property over mixed regimes
  for (const auto& [p, kind] :
       std::vector<std::pair<Rational, SetKind>>{
           {make_rational(1, 3), SetKind::Hypograph},
           {make_rational(2, 3), SetKind::Hypograph},
           {make_rational(3, 5), SetKind::Hypograph},
           {make_rational(1, 7), SetKind::Hypograph},
           {make_rational(7, 5), SetKind::Epigraph},
           {make_rational(-2, 3), SetKind::Epigraph}}) {
    const SdrLift& lift = powersdr::build(p, kind);
    for (double x : {0.1, 0.7, 1.0, 3.3, 42.0}) {
      double want = std::pow(x, powersdr::to_double(p));
      double got = powersdr::scalar_max_y(lift, x);
      CHECK(std::abs(got - want) <= 1e-10 * want);
    }
  }
  CHECK_THROWS_AS(powersdr::scalar_max_y(h, 0.0), std::domain_error);
}

TEST_CASE("hit-and-run sampling stays feasible") {
  const SdrLift& h = powersdr::build(make_rational(1, 2), SetKind::Hypograph);
  SymMatrix x1 = SymMatrix::from_rows({{4.0}});

  // zero steps: the interior start itself
  auto [y0, aux0] = powersdr::sample_feasible(h, x1, 0, 99);
  auto [yi, auxi] = powersdr::interior_start(h, x1, 0.1);
  CHECK(y0(0, 0) == Catch::Approx(yi(0, 0)));
  REQUIRE(aux0.size() == 1);
  CHECK(aux0[0](0, 0) == Catch::Approx(auxi[0](0, 0)));

  // the scalar region 0 <= y <= w <= 2 is explicit
  for (unsigned t = 0; t < 20; ++t) {
    auto [y, aux] = powersdr::sample_feasible(h, x1, 40, 1000 + t);
    double yv = y(0, 0), wv = aux[0](0, 0);
    CHECK(yv >= 0.0);
    CHECK(yv <= wv + 1e-12);
    CHECK(wv * wv <= 4.0 + 1e-9);
    CHECK(powersdr::evaluate(h.pencil, x1, y, aux).min_margin >= 0.0);
  }

  // identical seeds reproduce the same point; distinct seeds move it
  auto a = powersdr::sample_feasible(h, x1, 25, 7);
  auto b = powersdr::sample_feasible(h, x1, 25, 7);
  auto c = powersdr::sample_feasible(h, x1, 25, 8);
  CHECK(a.first(0, 0) == b.first(0, 0));
  CHECK(a.first(0, 0) != c.first(0, 0));

  // matrix case across regimes: final margin is never negative
  for (const auto& [p, kind] :
       std::vector<std::pair<Rational, SetKind>>{
           {make_rational(2, 3), SetKind::Hypograph},
           {make_rational(3, 2), SetKind::Epigraph},
           {make_rational(-1, 2), SetKind::Epigraph}}) {
    const SdrLift& lift = powersdr::build(p, kind);
    for (unsigned t = 0; t < 5; ++t) {
      auto g = rng_for(200 + t);
      SymMatrix x = random_pd(2 + static_cast<int>(t % 2), g);
      auto [y, aux] = powersdr::sample_feasible(lift, x, 30, 500 + t);
      CHECK(powersdr::evaluate(lift.pencil, x, y, aux).min_margin >= 0.0);
    }
  }
}

TEST_CASE("completeness suites report no failures") {
  auto r1 = powersdr::check_completeness(
      powersdr::build(make_rational(1, 2), SetKind::Hypograph), 100, 4, 11);
  CHECK(r1.trials == 100);
  CHECK(r1.completeness_failures == 0);
  CHECK(r1.worst_margin >= -1e-7);

  auto r2 = powersdr::check_completeness(
      powersdr::build(make_rational(3, 2), SetKind::Epigraph), 100, 3, 12);
  CHECK(r2.completeness_failures == 0);

  auto r3 = powersdr::check_completeness(
      powersdr::build(make_rational(7, 11), SetKind::Hypograph), 100, 1, 13);
  CHECK(r3.completeness_failures == 0);

  // scalar cross-check: sampled members never exceed the interval oracle
  const SdrLift& h711 =
      powersdr::build(make_rational(7, 11), SetKind::Hypograph);
  for (unsigned t = 0; t < 20; ++t) {
    auto g = rng_for(700 + t);
    SymMatrix x = powersdr::sample_domain_point(h711.p, 1, g);
    if (x(0, 0) <= 0.0) continue;
    SymMatrix y =
        powersdr::sample_member_y(h711.p, SetKind::Hypograph, x, g);
    CHECK(y(0, 0) <= powersdr::scalar_max_y(h711, x(0, 0)) + 1e-8);
  }

  // determinism of the report
  auto r4 = powersdr::check_completeness(
      powersdr::build(make_rational(1, 2), SetKind::Hypograph), 100, 4, 11);
  CHECK(r4.worst_margin == r1.worst_margin);
}

TEST_CASE("soundness suites report no failures") {
  auto r1 = powersdr::check_soundness(
      powersdr::build(make_rational(1, 2), SetKind::Hypograph), 60, 3, 25, 21);
  CHECK(r1.soundness_failures == 0);
  CHECK(r1.trials == 60);

  auto r2 = powersdr::check_soundness(
      powersdr::build(make_rational(3, 5), SetKind::Hypograph), 40, 2, 25, 22);
  CHECK(r2.soundness_failures == 0);

  auto r3 = powersdr::check_soundness(
      powersdr::build(make_rational(-1, 2), SetKind::Epigraph), 30, 2, 25, 23);
  CHECK(r3.soundness_failures == 0);
}

TEST_CASE("infeasibility probe separates members from near misses") {
  // scalar exact case: x = 1, y = 2 forces w >= 2 against w^2 <= 1
  const SdrLift& h = powersdr::build(make_rational(1, 2), SetKind::Hypograph);
  SymMatrix x1 = SymMatrix::from_rows({{1.0}});
  SymMatrix y2 = SymMatrix::from_rows({{2.0}});
  auto probe = powersdr::probe_infeasibility(h, x1, y2, 200);
  CHECK_FALSE(probe.feasible_found);
  CHECK(probe.residual >= 0.5);

  // members come back feasible immediately via the canonical witness
  auto g = rng_for(42);
  SymMatrix x = random_pd(3, g);
  SymMatrix member_y =
      0.5 * powersdr::matrix_power(x, make_rational(1, 2));
  auto probe2 = powersdr::probe_infeasibility(h, x, member_y, 200);
  CHECK(probe2.feasible_found);

  // shifted non-members across two exponents and sizes
  for (const auto& p : {make_rational(1, 2), make_rational(2, 3)}) {
    const SdrLift& lift = powersdr::build(p, SetKind::Hypograph);
    for (unsigned t = 0; t < 10; ++t) {
      auto gg = rng_for(900 + t);
      int n = 1 + static_cast<int>(t % 3);
      SymMatrix xx = random_pd(n, gg);
      SymMatrix yy = powersdr::matrix_power(xx, p) +
                     0.1 * SymMatrix::identity(n);
      auto pr = powersdr::probe_infeasibility(lift, xx, yy, 300);
      CHECK_FALSE(pr.feasible_found);
      CHECK(pr.residual >= 1e-3);
    }
  }
}

TEST_CASE("midpoint convexity checks across the three regimes") {
  auto r1 = powersdr::midpoint_convexity_check(make_rational(1, 2),
                                               SetKind::Hypograph, 100, 3, 31);
  CHECK(r1.soundness_failures == 0);
  auto r2 = powersdr::midpoint_convexity_check(make_rational(3, 2),
                                               SetKind::Epigraph, 100, 3, 32);
  CHECK(r2.soundness_failures == 0);
  auto r3 = powersdr::midpoint_convexity_check(make_rational(-1, 2),
                                               SetKind::Epigraph, 100, 3, 33);
  CHECK(r3.soundness_failures == 0);
  auto r4 = powersdr::midpoint_convexity_check(make_rational(1, 1),
                                               SetKind::Hypograph, 50, 2, 34);
  CHECK(r4.soundness_failures == 0);
}

TEST_CASE("trial reports serialize with reproduction records") {
  auto r = powersdr::check_completeness(
      powersdr::build(make_rational(2, 3), SetKind::Hypograph), 25, 2, 77);
  auto j = powersdr::report_to_json(r);
  CHECK(j.at("seed") == 77);
  CHECK(j.at("n") == 2);
  CHECK(j.at("p") == "2/3");
  CHECK(j.at("kind") == "hypograph");
  CHECK(j.at("trials") == 25);
  CHECK(j.at("completeness_failures") == 0);
  CHECK(j.at("soundness_failures") == 0);
  CHECK(j.at("heuristic_infeasibility_confirmations") == 0);
  CHECK(j.at("worst_margin").is_number());
  CHECK(j.at("failures").is_array());
  CHECK(j.at("failures").empty());
}
