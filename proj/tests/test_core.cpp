#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mvhvi/gallery.hpp"
#include "mvhvi/instance_io.hpp"
#include "mvhvi/types.hpp"

using namespace mvhvi;

namespace {

const char* kMinimalInstance = R"json({
  "dims": {"n": 1, "m": 1, "k": 1},
  "A": {"P": [2.0], "power": null, "m_A": 2.0},
  "J": [{"breakpoints": [0.0],
         "pieces": [{"kind": "quad", "q": -0.5, "a": -1.0, "b": 0.0},
                    {"kind": "quad", "q": -0.5, "a": 1.0, "b": 0.0}]}],
  "gamma": {"G": [1.0]},
  "b": {"B": [1.0]},
  "lambda_set": {"variant": "orthant", "params": {}},
  "f": [3.0],
  "h": {"form": "power", "c_h": 1.5, "tau": 2.0},
  "profile": {"theta": 2.0, "alpha_J": 0.5, "beta_J": 0.5, "m_J": 0.5}
})json";

std::string replace_first(std::string text, const std::string& from,
                          const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

} // namespace

TEST_CASE("minimal instance parses with all fields in place") {
  const ProblemInstance inst = parse_instance(kMinimalInstance);
  CHECK(inst.dims.n_V == 1);
  CHECK(inst.dims.m_E == 1);
  CHECK(inst.dims.k_X == 1);
  CHECK(inst.A.P(0, 0) == 2.0);
  CHECK(!inst.A.power.has_value());
  CHECK(inst.f[0] == 3.0);
  CHECK(inst.h.is_power());
  CHECK(inst.h.c_h == 1.5);
  CHECK(inst.gamma.operator_norm == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(inst.profile.alpha_b.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(inst.Lambda.kind() == LambdaSet::Kind::NonnegativeOrthant);
}

TEST_CASE("box upper bound must be nonnegative") {
  const std::string text = replace_first(
      kMinimalInstance, R"({"variant": "orthant", "params": {}})",
      R"({"variant": "box", "params": {"upper": [-1.0]}})");
  CHECK_THROWS_AS(parse_instance(text), HypothesisError);
}

TEST_CASE("shape mismatch is rejected") {
  const std::string text =
      replace_first(kMinimalInstance, R"("B": [1.0])",
                    R"("B": [1.0, 0.0, 0.0, 0.0, 2.0, 0.0])");
  CHECK_THROWS_AS(parse_instance(text), ShapeError);
}

TEST_CASE("unknown keys are rejected") {
  const std::string text = replace_first(
      kMinimalInstance, R"("f": [3.0],)", R"("f": [3.0], "extra": 1,)");
  CHECK_THROWS_AS(parse_instance(text), ParseError);
  const std::string text2 = replace_first(
      kMinimalInstance, R"("P": [2.0],)", R"("P": [2.0], "note": "x",)");
  CHECK_THROWS_AS(parse_instance(text2), ParseError);
}

TEST_CASE("declared m_A above the symmetric-part floor is rejected") {
  const std::string text =
      replace_first(kMinimalInstance, R"("m_A": 2.0)", R"("m_A": 2.5)");
  CHECK_THROWS_AS(parse_instance(text), HypothesisError);
}

TEST_CASE("malformed json raises ParseError") {
  CHECK_THROWS_AS(parse_instance("{ not json"), ParseError);
  CHECK_THROWS_AS(parse_instance("[1,2,3]"), ParseError);
}

TEST_CASE("apply_A") {
  OperatorSpec A;
  A.P = Mat::Constant(1, 1, 2.0);
  CHECK(A.apply(Vec::Constant(1, 3.0))[0] == 6.0);

  OperatorSpec Ap;
  Ap.P = Mat::Zero(1, 1);
  Ap.power = PowerTerm{3.0, 1.0};
  CHECK(Ap.apply(Vec::Constant(1, 2.0))[0] == doctest::Approx(4.0));

  OperatorSpec A2;
  A2.P = 2.0 * Mat::Identity(2, 2);
  Vec u(2);
  u << 1.0, -1.0;
  const Vec y = A2.apply(u);
  CHECK(y[0] == 2.0);
  CHECK(y[1] == -2.0);
}

TEST_CASE("eval_b") {
  BilinearFormSpec b;
  b.B = Mat::Constant(1, 1, 1.0);
  CHECK(b.eval(Vec::Constant(1, 2.0), Vec::Constant(1, 3.0)) == 6.0);

  BilinearFormSpec b2;
  b2.B = Mat::Zero(2, 2);
  b2.B(0, 0) = 1.0;
  b2.B(1, 1) = 2.0;
  Vec v(2), rho(2);
  v << 1.0, 1.0;
  rho << 1.0, 1.0;
  CHECK(b2.eval(v, rho) == 3.0);
  CHECK(b2.eval(Vec::Zero(2), rho) == 0.0);
}

TEST_CASE("bilinearity holds to 1e-12 relative") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 2.0);
  BilinearFormSpec b;
  b.B = Mat(3, 4);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 4; ++j) b.B(i, j) = g(rng);
  }
  for (int trial = 0; trial < 1000; ++trial) {
    Vec x1(4), x2(4), rho(3), rho2(3);
    for (int i = 0; i < 4; ++i) {
      x1[i] = g(rng);
      x2[i] = g(rng);
    }
    for (int i = 0; i < 3; ++i) {
      rho[i] = g(rng);
      rho2[i] = g(rng);
    }
    const double a = g(rng);
    const double lhs = b.eval(a * x1 + x2, rho);
    const double rhs = a * b.eval(x1, rho) + b.eval(x2, rho);
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(1.0, std::fabs(rhs)));
    const double lhs2 = b.eval(x1, a * rho + rho2);
    const double rhs2 = a * b.eval(x1, rho) + b.eval(x1, rho2);
    CHECK(std::fabs(lhs2 - rhs2) <= 1e-12 * std::max(1.0, std::fabs(rhs2)));
  }
}

TEST_CASE("projection examples") {
  const LambdaSet orthant = LambdaSet::orthant(2);
  Vec rho(2);
  rho << -1.0, 2.0;
  const Vec p = orthant.project(rho);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 2.0);

  Vec g(2);
  g << 1.0, 1.0;
  const LambdaSet box = LambdaSet::box(g);
  Vec q(2);
  q << 2.0, 0.5;
  const Vec pb = box.project(q);
  CHECK(pb[0] == 1.0);
  CHECK(pb[1] == 0.5);
}

TEST_CASE("projection is idempotent and nonexpansive") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 3.0);
  Mat C(3, 2);
  C << -1.0, 0.0, 0.0, -1.0, 1.0, 1.0;
  Vec d(3);
  d << 0.0, 0.0, 2.0;
  const std::vector<LambdaSet> sets = {
      LambdaSet::orthant(2), LambdaSet::box(Vec::Constant(2, 1.5)),
      LambdaSet::polyhedron(C, d)};
  for (const auto& L : sets) {
    for (int trial = 0; trial < 500; ++trial) {
      Vec x(2), y(2);
      for (int i = 0; i < 2; ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
      }
      const Vec px = L.project(x);
      const Vec py = L.project(y);
      CHECK(L.contains(px, 1e-9));
      CHECK((L.project(px) - px).norm() == 0.0);
      CHECK((px - py).norm() <= (x - y).norm() + 1e-12);
    }
  }
}

TEST_CASE("polyhedron projection is the closest feasible point") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 2.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Mat C(3, 2);
  C << -1.0, 0.0, 0.0, -1.0, 1.0, 2.0;
  Vec d(3);
  d << 0.0, 0.0, 3.0;
  const LambdaSet L = LambdaSet::polyhedron(C, d);
  for (int trial = 0; trial < 200; ++trial) {
    Vec x(2);
    x << g(rng), g(rng);
    const Vec px = L.project(x);
    // Compare against random feasible points.
    for (int probe = 0; probe < 50; ++probe) {
      Vec y(2);
      y << 3.0 * u01(rng), 1.5 * u01(rng);
      if (!L.contains(y, 0.0)) continue;
      CHECK((x - px).norm() <= (x - y).norm() + 1e-10);
    }
  }
}

TEST_CASE("operator monotonicity audit for declared m_A") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> g(0.0, 2.0);
  OperatorSpec A;
  Mat S(3, 3);
  S << 4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 5.0;
  Mat R(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) R(i, j) = g(rng);
  }
  A.P = S + 0.5 * (R - R.transpose());
  A.declared_m_A = A.sym_eigmin() - 1e-12;
  A.validate(3);
  for (int trial = 0; trial < 10000; ++trial) {
    Vec u(3), v(3);
    for (int i = 0; i < 3; ++i) {
      u[i] = g(rng);
      v[i] = g(rng);
    }
    const double lhs = (A.apply(u) - A.apply(v)).dot(u - v);
    const double rhs = A.declared_m_A * (u - v).squaredNorm();
    CHECK(lhs >= rhs - 1e-9 * std::max(1.0, rhs));
  }
}

TEST_CASE("gamma norm cache is validated") {
  GammaSpec gamma = GammaSpec::from_matrix(Mat::Identity(2, 2));
  gamma.operator_norm = 2.0;
  CHECK_THROWS_AS(gamma.validate(2, 2), HypothesisError);
}

TEST_CASE("instance round-trips through the document schema") {
  for (const char* name : {"kink-multiplier", "scalar-lcp", "contact-rod-4"}) {
    const ProblemInstance inst = make_gallery_instance(name);
    const ProblemInstance back = parse_instance(instance_to_json(inst));
    CHECK(back.dims.n_V == inst.dims.n_V);
    CHECK((back.A.P - inst.A.P).norm() == 0.0);
    CHECK((back.f - inst.f).norm() == 0.0);
    CHECK(back.h.c_h == inst.h.c_h);
    CHECK(back.profile.m_J.value == inst.profile.m_J.value);
    Vec probe = Vec::Constant(inst.dims.k_X, 0.37);
    CHECK(back.J.eval(probe) == inst.J.eval(probe));
  }
}
