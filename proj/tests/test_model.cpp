#include <doctest.h>

#include <cmath>

#include "secdry/model.hpp"

using namespace secdry;

TEST_CASE("grid spacing dz = H/(m-1)") {
  ModelParameters p;
  p.H = 0.02;
  p.m = 20;
  CHECK(build_grid(p).dz == doctest::Approx(0.02 / 19).epsilon(1e-15));
  CHECK(build_grid(p).dz == doctest::Approx(1.0526315789473684e-3).epsilon(1e-12));

  p.m = 2;
  CHECK(build_grid(p).dz == doctest::Approx(0.02).epsilon(1e-15));

  p.H = 0.0102;
  p.m = 20;
  CHECK(build_grid(p).dz == doctest::Approx(0.0102 / 19).epsilon(1e-15));

  p.m = 1;
  CHECK_THROWS_AS(build_grid(p), Error);
  p.m = 20;
  p.H = -1.0;
  CHECK_THROWS_AS(build_grid(p), Error);
}

TEST_CASE("shelf temperature ramp and cap") {
  ShelfSchedule s;  // 253.15 K, 0.2 K/min, cap 313.15 K
  CHECK(shelf_temperature(0.0, s) == doctest::Approx(253.15));
  CHECK(shelf_temperature(300.0 * 60.0, s) == doctest::Approx(313.15).epsilon(1e-12));
  CHECK(shelf_temperature(600.0 * 60.0, s) == doctest::Approx(313.15));
  // nondecreasing
  double prev = -1.0;
  for (double t = 0.0; t < 40000.0; t += 997.0) {
    const double v = shelf_temperature(t, s);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(shelf_cap_time(s) == doctest::Approx(18000.0).epsilon(1e-9));
}

TEST_CASE("Arrhenius rate constant") {
  ModelParameters p;  // A = 3.34e-3, E_a = 8316
  // independent high-precision evaluation of A exp(-E_a/(R T)) at 241.15 K
  CHECK(desorption_rate_constant(241.15, p) ==
        doctest::Approx(5.27694244638056e-5).epsilon(1e-12));

  SUBCASE("E_a = 0 gives k_s = A for any T") {
    p.E_a = 0.0;
    for (double T : {200.0, 241.15, 300.0, 400.0}) {
      CHECK(desorption_rate_constant(T, p) == doctest::Approx(p.A).epsilon(1e-15));
    }
  }
  SUBCASE("monotone increasing in T, approaching A from below") {
    double prev = 0.0;
    for (double T = 200.0; T <= 2.0e6; T *= 2.0) {
      const double k = desorption_rate_constant(T, p);
      CHECK(k > prev);
      CHECK(k < p.A);
      prev = k;
    }
    CHECK(desorption_rate_constant(1e12, p) == doctest::Approx(p.A).epsilon(1e-9));
  }
}

TEST_CASE("rhs equilibrium fixed point") {
  ModelParameters p;
  p.c_s_eq = 0.0;
  const Grid grid = build_grid(p);
  ProductState state{Vec::Constant(p.m, 313.15), Vec::Zero(p.m)};
  const ProductState d = rhs(state, ControlInput{313.15, 0.0}, p, grid);
  CHECK(d.T.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-18));
  CHECK(d.c_s.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("rhs conduction enters through the bottom cell only") {
  ModelParameters p;
  const Grid grid = build_grid(p);
  ProductState state{Vec::Constant(p.m, 260.0), Vec::Zero(p.m)};
  const ProductState d = rhs(state, ControlInput{280.0, 0.0}, p, grid);
  for (int i = 0; i < p.m - 1; ++i) CHECK(d.T[i] == 0.0);
  CHECK(d.T[p.m - 1] > 0.0);
  CHECK(d.c_s.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("rhs desorption term at Table-1 defaults") {
  ModelParameters p;
  const Grid grid = build_grid(p);
  ProductState state{Vec::Constant(p.m, 241.15), Vec::Constant(p.m, 0.2059)};
  const ProductState d = rhs(state, ControlInput{241.15, 0.0}, p, grid);
  // hand evaluation: dc/dt = -k_s(241.15) * 0.2059, equal in every cell
  for (int i = 0; i < p.m; ++i) {
    CHECK(d.c_s[i] == doctest::Approx(-1.08652244970976e-5).epsilon(1e-12));
  }
  // temperature picks up the desorption heat sink beta * dc/dt uniformly
  const double beta = p.rho_d * p.dH_s / (p.rho * p.C_p);
  for (int i = 0; i < p.m - 1; ++i) {
    CHECK(d.T[i] == doctest::Approx(beta * d.c_s[0]).epsilon(1e-12));
  }
}

TEST_CASE("rhs with equilibrium concentration") {
  ModelParameters p;
  p.c_s_eq = 0.05;
  const Grid grid = build_grid(p);
  ProductState state{Vec::Constant(p.m, 280.0), Vec::Constant(p.m, 0.05)};
  const ProductState d = rhs(state, ControlInput{280.0, 0.0}, p, grid);
  CHECK(d.c_s.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-18));
}

TEST_CASE("rhs rejects non-finite state") {
  ModelParameters p;
  const Grid grid = build_grid(p);
  ProductState state{Vec::Constant(p.m, 260.0), Vec::Zero(p.m)};
  state.T[3] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(rhs(state, ControlInput{280.0, 0.0}, p, grid), Error);
  state.T[3] = -5.0;
  CHECK_THROWS_AS(rhs(state, ControlInput{280.0, 0.0}, p, grid), Error);
  state.T[3] = 260.0;
  state.c_s[0] = -1e-6;
  CHECK_THROWS_AS(rhs(state, ControlInput{280.0, 0.0}, p, grid), Error);
}

TEST_CASE("averages") {
  ProductState uniform{Vec::Constant(20, 300.0), Vec::Constant(20, 0.1)};
  auto [T_avg, c_avg] = averages(uniform);
  CHECK(T_avg == doctest::Approx(300.0));
  CHECK(c_avg == doctest::Approx(0.1));

  ProductState two{Vec(2), Vec(2)};
  two.T << 240.0, 260.0;
  two.c_s << 0.0, 0.0;
  CHECK(averages(two).first == doctest::Approx(250.0));

  Vec alt(20);
  for (int i = 0; i < 20; ++i) alt[i] = (i % 2 == 0) ? 0.0 : 0.2;
  ProductState alternating{Vec::Constant(20, 300.0), alt};
  CHECK(averages(alternating).second == doctest::Approx(0.1));
}

TEST_CASE("parameter validation") {
  ModelParameters p;
  CHECK(validate(p).empty());

  SUBCASE("hard errors") {
    p.rho = 0.0;
    CHECK_THROWS_AS(validate(p), Error);
    p.rho = 215.0;
    p.m = 2;
    CHECK_THROWS_AS(validate(p), Error);
    p.m = 20;
    p.c_s_eq = -0.1;
    CHECK_THROWS_AS(validate(p), Error);
  }
  SUBCASE("range warnings, not errors") {
    p.h = 0.5;
    CHECK(validate(p).size() == 1);
    p.E_a = 6e4;
    CHECK(validate(p).size() == 2);
    // Case C literature values stay warning-free
    ModelParameters c;
    c.E_a = 37714.0;
    c.A = 277.0;
    c.h = 7.0;
    CHECK(validate(c).empty());
  }
  SUBCASE("shelf schedule") {
    ShelfSchedule s;
    CHECK(validate(s).empty());
    s.T_b_max = s.T_b0 - 1.0;
    CHECK_THROWS_AS(validate(s), Error);
  }
}
