#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>

#include "mvhvi/piecewise.hpp"
#include "mvhvi/simd/kernels.hpp"

// The dispatched kernels must agree with the scalar reference bit for bit:
// same per-sample operation order, no FMA, contraction disabled.

using namespace mvhvi;
using simd::active_kernels;
using simd::scalar_kernels;

namespace {

std::vector<double> random_array(std::mt19937_64& rng, long n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

TEST_CASE("dispatch reports a kernel set") {
  CHECK(active_kernels().name != nullptr);
  INFO("active kernels: ", active_kernels().name);
  CHECK(scalar_kernels().name == std::string("scalar"));
}

TEST_CASE("matvec matches scalar bit for bit") {
  std::mt19937_64 rng(11);
  for (long n : {1L, 3L, 7L, 64L, 1001L}) {
    for (int rows : {1, 2, 5}) {
      for (int cols : {1, 3, 6}) {
        const auto M = random_array(rng, rows * cols, 2.0);
        const auto X = random_array(rng, cols * n, 3.0);
        std::vector<double> ys(rows * n), ya(rows * n);
        scalar_kernels().matvec(M.data(), rows, cols, X.data(), n, ys.data());
        active_kernels().matvec(M.data(), rows, cols, X.data(), n, ya.data());
        REQUIRE(bit_equal(ys, ya));
      }
    }
  }
}

TEST_CASE("dot_cols matches scalar bit for bit") {
  std::mt19937_64 rng(12);
  for (long n : {1L, 4L, 9L, 513L}) {
    for (int rows : {1, 2, 6}) {
      const auto A = random_array(rng, rows * n, 1.5);
      const auto B = random_array(rng, rows * n, 2.5);
      std::vector<double> os(n), oa(n);
      scalar_kernels().dot_cols(A.data(), B.data(), rows, n, os.data());
      active_kernels().dot_cols(A.data(), B.data(), rows, n, oa.data());
      REQUIRE(bit_equal(os, oa));
    }
  }
}

TEST_CASE("piecewise_eval matches scalar bit for bit, breakpoints included") {
  std::mt19937_64 rng(13);
  std::vector<PieceDesc> pieces(3);
  pieces[0].kind = PieceDesc::Kind::Quad;
  pieces[0].q = -0.5;
  pieces[0].a = -1.0;
  pieces[1].kind = PieceDesc::Kind::Quad;
  pieces[1].q = 0.7;
  pieces[1].a = -1.0;
  pieces[2].kind = PieceDesc::Kind::Quad;
  pieces[2].q = 0.7;
  pieces[2].a = 0.36;
  pieces[2].b = -1.36; // continuous at x = 1 with the middle piece
  const CoordinatePieces coord = make_coordinate({0.0, 1.0}, pieces);

  for (long n : {1L, 5L, 8L, 1000L}) {
    auto X = random_array(rng, n, 2.0);
    // Park a share of the samples exactly on breakpoints.
    for (long s = 0; s < n; s += 3) X[s] = (s % 2) ? 0.0 : 1.0;
    std::vector<double> vs(n), ls(n), hs(n), va(n), la(n), ha(n);
    scalar_kernels().piecewise_eval(coord.view(), X.data(), n, vs.data(),
                                    ls.data(), hs.data());
    active_kernels().piecewise_eval(coord.view(), X.data(), n, va.data(),
                                    la.data(), ha.data());
    REQUIRE(bit_equal(vs, va));
    REQUIRE(bit_equal(ls, la));
    REQUIRE(bit_equal(hs, ha));
  }
}

TEST_CASE("support kernels match scalar bit for bit") {
  std::mt19937_64 rng(14);
  for (long n : {2L, 7L, 333L}) {
    for (int k : {1, 3, 5}) {
      auto lo = random_array(rng, k, 1.0);
      auto hi = lo;
      for (int i = 0; i < k; ++i) hi[i] += std::abs(lo[i]) + 0.5;
      const auto D = random_array(rng, k * n, 2.0);
      std::vector<double> os(n, 0.5), oa(n, 0.5);
      scalar_kernels().support_fixed(lo.data(), hi.data(), k, D.data(), n,
                                     os.data(), 1);
      active_kernels().support_fixed(lo.data(), hi.data(), k, D.data(), n,
                                     oa.data(), 1);
      REQUIRE(bit_equal(os, oa));

      const auto LO = random_array(rng, k * n, 1.0);
      auto HI = LO;
      for (auto& x : HI) x += 0.25;
      scalar_kernels().support_var(LO.data(), HI.data(), D.data(), k, n,
                                   os.data(), 0);
      active_kernels().support_var(LO.data(), HI.data(), D.data(), k, n,
                                   oa.data(), 0);
      REQUIRE(bit_equal(os, oa));
    }
  }
}

TEST_CASE("power_term matches scalar bit for bit") {
  std::mt19937_64 rng(15);
  for (double p : {2.0, 3.0, 4.0, 2.5}) {
    const auto X = random_array(rng, 517, 3.0);
    std::vector<double> os(X.size()), oa(X.size());
    scalar_kernels().power_term(X.data(), X.size(), p, 0.7, os.data());
    active_kernels().power_term(X.data(), X.size(), p, 0.7, oa.data());
    REQUIRE(bit_equal(os, oa));
  }
}

TEST_CASE("score_max and reduce_max match value and index") {
  std::mt19937_64 rng(16);
  for (long n : {1L, 3L, 4L, 9L, 1024L}) {
    for (int rows : {1, 4}) {
      const auto q = random_array(rng, n, 1.0);
      const auto c = random_array(rng, rows, 1.0);
      const auto X = random_array(rng, rows * n, 2.0);
      const auto rs = scalar_kernels().score_max(q.data(), c.data(), X.data(),
                                                 rows, n);
      const auto ra = active_kernels().score_max(q.data(), c.data(), X.data(),
                                                 rows, n);
      REQUIRE(rs.value == ra.value);
      REQUIRE(rs.index == ra.index);
    }
    auto a = random_array(rng, n, 1.0);
    // Force ties to check first-occurrence semantics.
    if (n >= 4) a[n - 1] = a[1] = 100.0;
    const auto rs = scalar_kernels().reduce_max(a.data(), n);
    const auto ra = active_kernels().reduce_max(a.data(), n);
    REQUIRE(rs.value == ra.value);
    REQUIRE(rs.index == ra.index);
  }
}
