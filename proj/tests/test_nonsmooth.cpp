#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mvhvi/piecewise.hpp"

using namespace mvhvi;

namespace {

/// j(x) = |x| - x^2/4 split at the kink.
PiecewiseC1Spec kink_spec() {
  PieceDesc left;
  left.kind = PieceDesc::Kind::Quad;
  left.q = -0.5;
  left.a = -1.0;
  PieceDesc right = left;
  right.a = 1.0;
  return PiecewiseC1Spec({make_coordinate({0.0}, {left, right})});
}

PiecewiseC1Spec abs_spec(double w) {
  PieceDesc p;
  p.kind = PieceDesc::Kind::Abs;
  p.w = w;
  return PiecewiseC1Spec({make_coordinate({0.0}, {p, p})});
}

PiecewiseC1Spec square_spec() {
  PieceDesc p;
  p.kind = PieceDesc::Kind::Quad;
  p.q = 2.0;
  return PiecewiseC1Spec({make_coordinate({}, {p})});
}

Vec v1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

} // namespace

TEST_CASE("construction rejects bad coordinate data") {
  PieceDesc p;
  CHECK_THROWS_AS(make_coordinate({1.0, 1.0}, {p, p, p}), HypothesisError);
  CHECK_THROWS_AS(make_coordinate({0.0}, {p}), ShapeError);
  // Abs kink away from a breakpoint.
  PieceDesc a;
  a.kind = PieceDesc::Kind::Abs;
  a.w = 1.0;
  CHECK_THROWS_AS(make_coordinate({}, {a}), HypothesisError);
  CHECK_THROWS_AS(make_coordinate({-1.0}, {a, a}), HypothesisError);
  // Discontinuity.
  PieceDesc lo, hi;
  lo.a = 1.0;
  hi.a = 1.0;
  hi.b = 5.0;
  CHECK_THROWS_AS(make_coordinate({0.0}, {lo, hi}), HypothesisError);
}

TEST_CASE("eval_J") {
  const PiecewiseC1Spec kink = kink_spec();
  CHECK(kink.eval(v1(2.0)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(kink.eval(v1(0.0)) == 0.0);

  PiecewiseC1Spec two(
      {abs_spec(1.0).coords()[0], square_spec().coords()[0]});
  CHECK(two.eval(v2(-1.0, 2.0)) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("subgradient_box") {
  const PiecewiseC1Spec kink = kink_spec();
  const SubgradientBox at0 = kink.subgradient_box(v1(0.0));
  CHECK(at0.lo[0] == -1.0);
  CHECK(at0.hi[0] == 1.0);
  const SubgradientBox at2 = kink.subgradient_box(v1(2.0));
  CHECK(at2.lo[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(at2.hi[0] == at2.lo[0]);

  const PiecewiseC1Spec sq = square_spec();
  for (double x : {-3.0, 0.0, 1.7}) {
    const SubgradientBox b = sq.subgradient_box(v1(x));
    CHECK(b.lo[0] == doctest::Approx(2.0 * x).epsilon(1e-15));
    CHECK(b.hi[0] == b.lo[0]);
  }
}

TEST_CASE("breakpoint membership is exact comparison") {
  const PiecewiseC1Spec kink = kink_spec();
  const SubgradientBox at_eps = kink.subgradient_box(v1(1e-15));
  CHECK(at_eps.lo[0] == at_eps.hi[0]); // singleton just off the kink
  const SubgradientBox at0 = kink.subgradient_box(v1(0.0));
  CHECK(at0.hi[0] - at0.lo[0] == 2.0);
}

TEST_CASE("clarke_dir") {
  const PiecewiseC1Spec kink = kink_spec();
  CHECK(kink.clarke_dir(v1(0.0), v1(1.0)) == 1.0);
  CHECK(kink.clarke_dir(v1(0.0), v1(-1.0)) == 1.0);

  const PiecewiseC1Spec sq = square_spec();
  CHECK(sq.clarke_dir(v1(3.0), v1(-2.0)) ==
        doctest::Approx(-12.0).epsilon(1e-15));

  // Boxes [-1,1] x [2,2], direction (1,-1): 1 + (-2) = -1.
  PieceDesc lin;
  lin.a = 2.0;
  PiecewiseC1Spec two(
      {abs_spec(1.0).coords()[0], make_coordinate({}, {lin})});
  CHECK(two.clarke_dir(v2(0.0, 5.0), v2(1.0, -1.0)) ==
        doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("clarke_dir equals the best box vertex") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 1.5);
  // Four coordinates mixing kinks and smooth pieces.
  std::vector<CoordinatePieces> coords;
  coords.push_back(kink_spec().coords()[0]);
  coords.push_back(abs_spec(0.7).coords()[0]);
  coords.push_back(square_spec().coords()[0]);
  coords.push_back(kink_spec().coords()[0]);
  const PiecewiseC1Spec J(std::move(coords));
  for (int trial = 0; trial < 200; ++trial) {
    Vec x(4), d(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = (trial % 3 == 0) ? 0.0 : g(rng);
      d[i] = g(rng);
    }
    const SubgradientBox box = J.subgradient_box(x);
    double best = -1e300;
    for (int mask = 0; mask < 16; ++mask) {
      double acc = 0.0;
      for (int i = 0; i < 4; ++i) {
        acc += ((mask >> i) & 1 ? box.hi[i] : box.lo[i]) * d[i];
      }
      best = std::max(best, acc);
    }
    CHECK(J.clarke_dir(x, d) == doctest::Approx(best).epsilon(1e-14));
  }
}

TEST_CASE("symmetric bound: J0(x;d) + J0(x;-d) >= 0") {
  std::mt19937_64 rng(78);
  std::normal_distribution<double> g(0.0, 2.0);
  const PiecewiseC1Spec J = kink_spec();
  for (int trial = 0; trial < 2000; ++trial) {
    const Vec x = v1(g(rng));
    const Vec d = v1(g(rng));
    CHECK(J.clarke_dir(x, d) + J.clarke_dir(x, -d) >= -1e-14);
  }
}

TEST_CASE("check_prop_2_3 passes for gallery kernels") {
  CHECK_NOTHROW(check_prop_2_3(kink_spec(), 10000, 123));
  CHECK_NOTHROW(check_prop_2_3(PiecewiseC1Spec::zero(2), 2000, 124));
}

TEST_CASE("check_prop_2_3 flags a corrupted oracle") {
  const PiecewiseC1Spec J = kink_spec();
  CHECK_THROWS_AS(
      check_prop_2_3_against(
          J, 500, 125,
          [&J](const Vec& x, const Vec& d) {
            return J.clarke_dir(x, d) - 0.1;
          }),
      PropertyViolation);
}

TEST_CASE("estimate_growth") {
  // Zero function: alpha 0, beta at the floor.
  const GrowthFit z = estimate_growth(PiecewiseC1Spec::zero(1), 1.0, 4.0, 2000);
  CHECK(z.alpha_J == 0.0);
  CHECK(z.beta_J <= 1e-6);

  // j = -|x| has J0(v;-v) = |v|: exact slope 1 at theta = 1.
  const GrowthFit lin = estimate_growth(abs_spec(-1.0), 1.0, 6.0, 4000);
  CHECK(lin.alpha_J <= 0.02);
  CHECK(lin.beta_J == doctest::Approx(1.0).epsilon(0.05));

  // Kink kernel at theta = 2: the fit must cover fresh samples.
  const PiecewiseC1Spec kink = kink_spec();
  const GrowthFit fit = estimate_growth(kink, 2.0, 6.0, 4000);
  CHECK(fit.beta_J <= 1.0);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec v = v1(u(rng));
    const double y = kink.clarke_dir(v, -v);
    CHECK(y <= fit.alpha_J + fit.beta_J * v.squaredNorm() + 1e-9);
  }

  // Quadratic growth cannot fit theta = 1.
  PieceDesc down;
  down.kind = PieceDesc::Kind::Quad;
  down.q = -2.0;
  const PiecewiseC1Spec neg_sq(
      std::vector<CoordinatePieces>{make_coordinate({}, {down})});
  CHECK_THROWS_AS(estimate_growth(neg_sq, 1.0, 8.0, 4000), GrowthFitError);
}

TEST_CASE("relaxed monotonicity floor") {
  CHECK(kink_spec().relaxed_monotonicity_floor() ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(PiecewiseC1Spec::zero(3).relaxed_monotonicity_floor() == 0.0);
  // Downward jump: no finite constant.
  CHECK(std::isinf(abs_spec(-1.0).relaxed_monotonicity_floor()));
}
