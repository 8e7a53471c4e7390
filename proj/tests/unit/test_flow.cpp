#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sfcevent/error.hpp"
#include "sfcevent/flow.hpp"

using namespace sfcevent;

namespace {

constexpr int kPolyN = 5;
constexpr double kSigma = 1.2;

template <class F>
Image from_function(int w, int h, F f) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = float(f(double(x), double(y)));
  return img;
}

// Checks every pixel at least poly_n / 2 from the border against the exact
// coefficients of the analytic image.
template <class Expected>
void expect_interior(const PolyExpansion& poly, Expected expected, double tol) {
  const int r = kPolyN / 2;
  for (int y = r; y < poly.height() - r; ++y) {
    for (int x = r; x < poly.width() - r; ++x) {
      const PolyCoeffs want = expected(x, y);
      const PolyCoeffs& got = poly.at(x, y);
      ASSERT_NEAR(got.c, want.c, tol) << x << "," << y;
      ASSERT_NEAR(got.bx, want.bx, tol) << x << "," << y;
      ASSERT_NEAR(got.by, want.by, tol) << x << "," << y;
      ASSERT_NEAR(got.a11, want.a11, tol) << x << "," << y;
      ASSERT_NEAR(got.a12, want.a12, tol) << x << "," << y;
      ASSERT_NEAR(got.a22, want.a22, tol) << x << "," << y;
    }
  }
}

double max_magnitude(const FlowField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.u.size(); ++i) m = std::max<double>(m, std::hypot(f.u.pixels()[i], f.v.pixels()[i]));
  return m;
}

}  // namespace

TEST(PolyExpansion, ConstantImage) {
  const Image img(40, 30, 0.7f);
  expect_interior(polynomial_expansion(img, kPolyN, kSigma), [](int, int) { return PolyCoeffs{0.7f}; }, 1e-6);
}

TEST(PolyExpansion, LinearRamp) {
  const Image img = from_function(40, 30, [](double x, double) { return 0.01 * x; });
  expect_interior(polynomial_expansion(img, kPolyN, kSigma),
                  [](int x, int) { return PolyCoeffs{float(0.01 * x), 0.01f}; }, 1e-6);
}

TEST(PolyExpansion, TwoDimensionalLinear) {
  const Image img = from_function(40, 30, [](double x, double y) { return 0.2 + 0.004 * x - 0.006 * y; });
  expect_interior(polynomial_expansion(img, kPolyN, kSigma),
                  [](int x, int y) { return PolyCoeffs{float(0.2 + 0.004 * x - 0.006 * y), 0.004f, -0.006f}; }, 1e-6);
}

TEST(PolyExpansion, QuadraticInX) {
  // f = a (x - x0)^2; around pixel p: a d^2 + 2 a (p - x0) d + a (p - x0)^2.
  constexpr double a = 0.0008, x0 = 20.0;
  const Image img = from_function(40, 30, [](double x, double) { return a * (x - x0) * (x - x0); });
  expect_interior(polynomial_expansion(img, kPolyN, kSigma),
                  [](int x, int) {
                    PolyCoeffs c;
                    c.c = float(a * (x - x0) * (x - x0));
                    c.bx = float(2 * a * (x - x0));
                    c.a11 = float(a);
                    return c;
                  },
                  1e-5);
}

TEST(PolyExpansion, QuadraticInYAndCrossTerm) {
  // f = a y^2 + k x y; the cross term is split evenly into a12.
  constexpr double a = 0.0005, k = 0.0003;
  const Image img = from_function(36, 28, [](double x, double y) { return a * y * y + k * x * y; });
  expect_interior(polynomial_expansion(img, kPolyN, kSigma),
                  [](int x, int y) {
                    PolyCoeffs c;
                    c.c = float(a * y * y + k * x * y);
                    c.bx = float(k * y);
                    c.by = float(2 * a * y + k * x);
                    c.a22 = float(a);
                    c.a12 = float(k / 2);
                    return c;
                  },
                  1e-5);
}

TEST(PolyExpansion, MatchesDenseLeastSquaresOnTexture) {
  const Image img = oracle::smooth_texture(48, 40, 11, 1.0);
  const PolyExpansion poly = polynomial_expansion(img, kPolyN, kSigma);
  for (int y = 0; y < img.height(); y += 3) {
    for (int x = 0; x < img.width(); x += 3) {
      const PolyCoeffs want = oracle::quadratic_fit(img, x, y, kPolyN, kSigma);
      const PolyCoeffs& got = poly.at(x, y);
      ASSERT_NEAR(got.c, want.c, 2e-5) << x << "," << y;
      ASSERT_NEAR(got.bx, want.bx, 2e-5);
      ASSERT_NEAR(got.by, want.by, 2e-5);
      ASSERT_NEAR(got.a11, want.a11, 2e-5);
      ASSERT_NEAR(got.a12, want.a12, 2e-5);
      ASSERT_NEAR(got.a22, want.a22, 2e-5);
    }
  }
}

TEST(PolyExpansion, OtherNeighborhoodSizesMatchOracle) {
  const Image img = oracle::smooth_texture(30, 24, 5, 1.0);
  for (auto [n, sigma] : {std::pair{7, 1.5}, std::pair{3, 0.8}}) {
    const PolyExpansion poly = polynomial_expansion(img, n, sigma);
    for (int y = 0; y < img.height(); y += 5)
      for (int x = 0; x < img.width(); x += 5) {
        const PolyCoeffs want = oracle::quadratic_fit(img, x, y, n, sigma);
        ASSERT_NEAR(poly.at(x, y).a11, want.a11, 2e-5);
        ASSERT_NEAR(poly.at(x, y).bx, want.bx, 2e-5);
        ASSERT_NEAR(poly.at(x, y).c, want.c, 2e-5);
      }
  }
}

TEST(FlowParams, Validation) {
  EXPECT_NO_THROW(FlowParams{}.validate());
  auto bad = [](auto mutate) {
    FlowParams p;
    mutate(p);
    EXPECT_THROW(p.validate(), Error);
  };
  bad([](FlowParams& p) { p.pyr_scale = 1.0; });
  bad([](FlowParams& p) { p.pyr_scale = 0.0; });
  bad([](FlowParams& p) { p.levels = 0; });
  bad([](FlowParams& p) { p.winsize = 14; });
  bad([](FlowParams& p) { p.winsize = 1; });
  bad([](FlowParams& p) { p.iterations = 0; });
  bad([](FlowParams& p) { p.poly_n = 4; });
  bad([](FlowParams& p) { p.poly_sigma = 0.0; });
}

TEST(DenseFlow, TranslationRecovery) {
  const Image prev = oracle::smooth_texture(256, 256, 2024);
  const Image next = oracle::shifted(prev, 3, 0);
  const FlowField flow = dense_flow(prev, next);
  int total = 0, good = 0;
  for (int y = 16; y < 256 - 16; ++y)
    for (int x = 16; x < 256 - 16; ++x) {
      ++total;
      good += std::hypot(flow.u.at(x, y) - 3.0, flow.v.at(x, y)) <= 0.5;
    }
  EXPECT_GE(double(good) / total, 0.9);
}

TEST(DenseFlow, IdenticalFramesGiveNearZero) {
  const Image img = oracle::smooth_texture(96, 80, 9);
  EXPECT_LE(max_magnitude(dense_flow(img, img)), 0.1);
}

TEST(DenseFlow, TexturelessPairHasNoMotion) {
  // Only rounding residue of the expansion reaches the regularized solve.
  const FlowField flow = dense_flow(Image(64, 48, 0.3f), Image(64, 48, 0.6f));
  EXPECT_LE(max_magnitude(flow), 1e-9);
}

TEST(DenseFlow, OutputIsFiniteOnDegenerateInput) {
  Image a(40, 40, 0.5f), b(40, 40, 0.5f);
  a.at(20, 20) = 1.0f;  // single spike, rank-deficient almost everywhere
  b.at(21, 20) = 1.0f;
  const FlowField flow = dense_flow(a, b);
  for (float v : flow.u.pixels()) ASSERT_TRUE(std::isfinite(v));
  for (float v : flow.v.pixels()) ASSERT_TRUE(std::isfinite(v));
}

TEST(DenseFlow, GeometryMismatch) {
  try {
    dense_flow(Image(10, 10), Image(11, 10));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GeometryMismatch);
  }
}

TEST(DenseFlow, ShiftEquivariance) {
  const Image prev = oracle::smooth_texture(128, 128, 77);
  const Image next = oracle::shifted(prev, 2, 1);
  const FlowField base = dense_flow(prev, next);
  for (auto [sx, sy] : {std::pair{4, 0}, std::pair{0, 3}, std::pair{-2, 1}}) {
    const FlowField moved = dense_flow(oracle::shifted(prev, sx, sy), oracle::shifted(next, sx, sy));
    double worst = 0.0;
    for (int y = 24; y < 128 - 24; ++y)
      for (int x = 24; x < 128 - 24; ++x) {
        worst = std::max<double>(worst, std::hypot(moved.u.at(x, y) - base.u.at(x - sx, y - sy),
                                           moved.v.at(x, y) - base.v.at(x - sx, y - sy)));
      }
    EXPECT_LE(worst, 0.25) << "shift " << sx << "," << sy;
  }
}

TEST(DenseFlow, StreamingEstimatorMatchesPairwise) {
  const Image f0 = oracle::smooth_texture(80, 64, 1);
  const Image f1 = oracle::shifted(f0, 1, 0);
  const Image f2 = oracle::shifted(f0, 2, 1);
  FlowEstimator est;
  EXPECT_FALSE(est.push(f0).has_value());
  const auto a = est.push(f1);
  const auto b = est.push(f2);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(*a, dense_flow(f0, f1));
  EXPECT_EQ(*b, dense_flow(f1, f2));
  est.reset();
  EXPECT_FALSE(est.push(f2).has_value());
}

TEST(DenseFlow, SmallFramesSkipCoarseLevels) {
  const Image a = oracle::smooth_texture(12, 12, 3);
  const FlowField flow = dense_flow(a, oracle::shifted(a, 1, 0));
  EXPECT_EQ(flow.width, 12);
  EXPECT_EQ(flow.height, 12);
  FlowParams p;
  p.levels = 6;
  EXPECT_GE(detail::build_pyramid(a, p).size(), 1u);
  EXPECT_LE(detail::build_pyramid(a, p).size(), 2u);
}
