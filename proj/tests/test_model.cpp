#include "layerdyn/model.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

using namespace layerdyn;

namespace {

// Independent brute-force quadrature oracle: composite Simpson at high n.
template <class F>
double simpson_oracle(F&& f, double a, double b, int n = 1 << 18) {
  const double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("eval_model at the wells and the saddle") {
  auto q = PotentialSpec::quartic();
  auto at1 = eval_model(q, 1.0);
  CHECK(at1.F == 0.0);
  CHECK(at1.f == 0.0);
  CHECK(at1.fp == Catch::Approx(2.0).margin(1e-14));
  CHECK(at1.fpp == Catch::Approx(6.0).margin(1e-14));

  auto at0 = eval_model(q, 0.0);
  CHECK(at0.F == Catch::Approx(0.25).margin(1e-15));
  CHECK(at0.f == 0.0);
  CHECK(at0.fp == Catch::Approx(-1.0).margin(1e-15));
  CHECK(at0.fpp == 0.0);

  auto a = PotentialSpec::asymmetric(0.5);
  CHECK(a.fp(-1.0) == Catch::Approx(1.0).margin(1e-13));  // A_- = 1
  CHECK(a.fp(1.0) == Catch::Approx(3.0).margin(1e-13));   // A_+ = sqrt(3)^2
}

TEST_CASE("derivative consistency of the polynomial model") {
  auto specs = {PotentialSpec::quartic(), PotentialSpec::asymmetric(0.3)};
  const double h = 1e-5;
  for (const auto& s : specs) {
    for (int i = 0; i <= 40; ++i) {
      const double u = -1.2 + 2.4 * i / 40;
      const double fd = (s.F(u + h) - s.F(u - h)) / (2 * h);
      CHECK(std::abs(s.f(u) - fd) <= 5e-10);
    }
  }
}

TEST_CASE("validate_double_well") {
  SECTION("quartic passes every condition") {
    auto rep = validate_double_well(PotentialSpec::quartic());
    CHECK(rep.all_pass);
  }
  SECTION("shifted potential fails the zero conditions") {
    auto rep = validate_double_well(
        PotentialSpec::custom({0.35, 0.0, -0.5, 0.0, 0.25}));
    CHECK_FALSE(rep.all_pass);
    bool f_at_wells_failed = false;
    for (auto& it : rep.items)
      if (it.name == "F(+1)=0" && !it.pass) f_at_wells_failed = true;
    CHECK(f_at_wells_failed);
  }
  SECTION("strong asymmetry a=0.99 is still a double well") {
    auto rep = validate_double_well(PotentialSpec::asymmetric(0.99));
    CHECK(rep.all_pass);
  }
}

TEST_CASE("weighted_average") {
  auto q = PotentialSpec::quartic();
  SECTION("constant damping averages to one") {
    CHECK(weighted_average(q, DampingSpec::one(), 0.7) ==
          Catch::Approx(1.0).epsilon(1e-12));
  }
  SECTION("quartic relaxation at tau=0.1 gives 0.96") {
    const double got = weighted_average(q, DampingSpec::relaxation(), 0.1);
    CHECK(got == Catch::Approx(0.96).epsilon(1e-10));
    // brute-force oracle for the same average
    auto num = simpson_oracle(
        [&](double u) {
          return std::sqrt(std::max(0.0, q.F(u))) * (1.0 + 0.1 * q.fp(u));
        },
        -1.0, 1.0);
    auto den =
        simpson_oracle([&](double u) { return std::sqrt(std::max(0.0, q.F(u))); },
                       -1.0, 1.0);
    CHECK(got == Catch::Approx(num / den).epsilon(1e-9));
  }
  SECTION("odd integrand averages to zero") {
    const double got = weighted_average_fn(q, [](double u) { return u; });
    CHECK(std::abs(got) <= 1e-12);
  }
}

TEST_CASE("d_infinity") {
  auto q = PotentialSpec::quartic();
  SECTION("closed form 2*sqrt(2)/3 for the quartic") {
    CHECK(d_infinity(q) == Catch::Approx(0.9428090415820634).epsilon(1e-11));
  }
  SECTION("sqrt homogeneity: 4F doubles the value") {
    auto scaled = PotentialSpec::custom({1.0, 0.0, -2.0, 0.0, 1.0});
    CHECK(d_infinity(scaled) ==
          Catch::Approx(2.0 * d_infinity(q)).epsilon(1e-10));
  }
  SECTION("asymmetric value against a two-precision oracle") {
    auto a = PotentialSpec::asymmetric(0.5);
    auto f = [&](double u) { return std::sqrt(std::max(0.0, 2.0 * a.F(u))); };
    auto lo = tanh_sinh(f, -1.0, 1.0, 1e-11);
    auto hi = tanh_sinh(f, -1.0, 1.0, 1e-13);
    REQUIRE(lo.converged);
    REQUIRE(hi.converged);
    CHECK(std::abs(lo.value - hi.value) <= 1e-10 * std::abs(hi.value));
    CHECK(d_infinity(a) == Catch::Approx(hi.value).epsilon(1e-10));
  }
  SECTION("refinement invariance") {
    CHECK(std::abs(d_infinity(q, 1e-11) - d_infinity(q, 1e-13)) <=
          1e-10 * d_infinity(q));
  }
}

TEST_CASE("gamma_tau") {
  auto q = PotentialSpec::quartic();
  SECTION("g == 1 gives exactly 1") {
    CHECK(gamma_tau(q, DampingSpec::one(), 0.3) ==
          Catch::Approx(1.0).epsilon(1e-11));
    CHECK(gamma_tau(PotentialSpec::asymmetric(0.4), DampingSpec::one(), 0.3) ==
          Catch::Approx(1.0).epsilon(1e-11));
  }
  SECTION("quartic relaxation closed form 1 - (2/5) tau") {
    CHECK(gamma_tau(q, DampingSpec::relaxation(), 0.25) ==
          Catch::Approx(0.9).epsilon(1e-10));
    CHECK(gamma_tau(q, DampingSpec::relaxation(), 0.0) ==
          Catch::Approx(1.0).epsilon(1e-12));
    for (double tau : {0.1, 0.5}) {
      CHECK(gamma_tau(q, DampingSpec::relaxation(), tau) ==
            Catch::Approx(1.0 - 0.4 * tau).epsilon(1e-10));
    }
  }
  SECTION("relaxation damping strictly speeds up the dynamics") {
    for (double tau : {1e-6, 1e-3, 0.2})
      CHECK(gamma_tau(q, DampingSpec::relaxation(), tau) < 1.0 - 1e-12);
  }
}

TEST_CASE("damping floor is measured per (g, tau)") {
  auto q = PotentialSpec::quartic();
  // relaxation: min over [-1.5,1.5] of 1 + tau f'(u) is at u = 0 where f'=-1
  CHECK(damping_floor(DampingSpec::relaxation(), q, 0.5) ==
        Catch::Approx(0.5).margin(1e-6));
  CHECK(validate_damping(DampingSpec::relaxation(), q, 0.5) > 0.0);
  CHECK_THROWS_AS(validate_damping(DampingSpec::relaxation(), q, 1.2),
                  DomainError);
  CHECK(damping_max(DampingSpec::one(), q, 0.1) == Catch::Approx(1.0));
}

TEST_CASE("model parameter triangle condition") {
  ModelParams p;
  p.eps = 0.03;
  p.rho = 0.3;
  p.N = 2;
  p.delta = 0.05;
  CHECK_NOTHROW(p.validate());  // 0.05 < 0.1 < 0.5
  p.delta = 0.2;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p.delta = 0.05;
  p.rho = 0.02;  // eps/rho = 1.5 > 1/N
  CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("model JSON round trip") {
  auto a = PotentialSpec::asymmetric(0.37);
  auto j = to_json(a);
  auto back = potential_from_json(j);
  CHECK(back == a);

  auto g = DampingSpec::tabulated({-1.0, 0.0, 1.0}, {2.0, 1.0, 2.0});
  auto jg = to_json(g);
  auto gb = damping_from_json(jg);
  CHECK(gb.family == DampingFamily::table);
  CHECK(gb.eval(a, 0.5, 0.0) == Catch::Approx(1.5));
  CHECK(gb.eval(a, -2.0, 0.0) == Catch::Approx(2.0));
}
