#include <cmath>

#include <gtest/gtest.h>

#include "panolab/metrics/farneback.hpp"
#include "panolab/metrics/motion.hpp"
#include "support/synthetic.hpp"

namespace panolab {
namespace {

struct MeanFlow {
  double dx = 0, dy = 0, abs_dy = 0;
};

MeanFlow interior_mean(const FlowField& f, int border) {
  MeanFlow m;
  int n = 0;
  for (int y = border; y < f.height() - border; ++y)
    for (int x = border; x < f.width() - border; ++x, ++n) {
      m.dx += f.dx(x, y);
      m.dy += f.dy(x, y);
      m.abs_dy += std::abs(f.dy(x, y));
    }
  m.dx /= n;
  m.dy /= n;
  m.abs_dy /= n;
  return m;
}

TEST(FarnebackParams, Validation) {
  EXPECT_NO_THROW(FarnebackParams{}.validate());
  EXPECT_THROW((FarnebackParams{1.0, 3, 15, 3, 5, 1.1}.validate()), InvalidInput);
  EXPECT_THROW((FarnebackParams{0.5, 0, 15, 3, 5, 1.1}.validate()), InvalidInput);
  EXPECT_THROW((FarnebackParams{0.5, 3, 14, 3, 5, 1.1}.validate()), InvalidInput);
  EXPECT_THROW((FarnebackParams{0.5, 3, 15, 3, 4, 1.1}.validate()), InvalidInput);
  EXPECT_THROW((FarnebackParams{0.5, 3, 1, 3, 5, 1.1}.validate()), InvalidInput);
}

TEST(Farneback, IdenticalFramesGiveNearZeroFlow) {
  const ImageBuffer a = testing::plane_image(128, 128, 3);
  const FlowField f = farneback_flow(a, a);
  EXPECT_TRUE(f.all_finite());
  EXPECT_LT(motion_magnitude(f), 0.05);
}

TEST(Farneback, IdenticalNoiseFramesGiveNearZeroFlow) {
  const ImageBuffer a = testing::noise_image(96, 96, 1, 2);
  EXPECT_LT(motion_magnitude(farneback_flow(a, a)), 0.05);
}

TEST(Farneback, RecoversHorizontalShift) {
  const ImageBuffer a = testing::plane_image(256, 256, 3);
  const ImageBuffer b = testing::plane_image(256, 256, 3, 3.0, 0.0);
  const MeanFlow m = interior_mean(farneback_flow(a, b), 15);
  EXPECT_GE(m.dx, 2.7);
  EXPECT_LE(m.dx, 3.3);
  EXPECT_LT(m.abs_dy, 0.3);
}

TEST(Farneback, RecoversDiagonalShift) {
  const ImageBuffer a = testing::plane_image(192, 192, 1);
  const ImageBuffer b = testing::plane_image(192, 192, 1, 2.0, -1.0);
  const MeanFlow m = interior_mean(farneback_flow(a, b), 15);
  const double err = std::hypot(m.dx - 2.0, m.dy + 1.0) / std::hypot(2.0, 1.0);
  EXPECT_LT(err, 0.1);
}

TEST(Farneback, ReverseFlowIsRoughlyOpposite) {
  const ImageBuffer a = testing::plane_image(256, 256, 1);
  const ImageBuffer b = testing::plane_image(256, 256, 1, 3.0, 0.0);
  const MeanFlow fwd = interior_mean(farneback_flow(a, b), 15);
  const MeanFlow bwd = interior_mean(farneback_flow(b, a), 15);
  EXPECT_LT(std::hypot(fwd.dx + bwd.dx, fwd.dy + bwd.dy), 0.5);
}

TEST(Farneback, SingleLevelStillTracksSmallShift) {
  const ImageBuffer a = testing::plane_image(128, 128, 1);
  const ImageBuffer b = testing::plane_image(128, 128, 1, 1.0, 0.0);
  FarnebackParams p;
  p.levels = 1;
  const MeanFlow m = interior_mean(farneback_flow(a, b, p), 15);
  EXPECT_NEAR(m.dx, 1.0, 0.15);
}

// A texture with 60 to 130 px periods is too flat for the 5-tap expansion,
// so the shift is underestimated. OpenCV 5.0 calcOpticalFlowFarneback with
// the same parameters on the same float frames gives a mean dx of 1.8816;
// matching it checks the implementation, not the texture.
TEST(Farneback, MatchesReferenceOnWeakTexture) {
  auto weak = [](double dx) {
    ImageBuffer img(256, 256, 3);
    for (int y = 0; y < 256; ++y)
      for (int x = 0; x < 256; ++x)
        for (int c = 0; c < 3; ++c) {
          const double u = x - dx, v = y, ph = 0.7 * c;
          img.at(x, y, c) = static_cast<float>(0.5 + 0.15 * std::sin(0.11 * u + 0.07 * v + ph) +
                                               0.12 * std::cos(0.05 * u - 0.13 * v + 0.4) +
                                               0.1 * std::sin(0.0189 * u + 0.17 * v) * std::cos(0.09 * u));
        }
    return img;
  };
  const MeanFlow m = interior_mean(farneback_flow(weak(0.0), weak(3.0)), 15);
  EXPECT_NEAR(m.dx, 1.8816, 0.01 * 1.8816);
}

TEST(Farneback, RejectsMismatchedFrames) {
  EXPECT_THROW(farneback_flow(ImageBuffer(32, 32, 1), ImageBuffer(32, 31, 1)), InvalidInput);
}

TEST(Farneback, GaussianKernelIsNormalized) {
  const auto k = farneback_detail::gaussian_kernel(4, 1.3, true);
  double s = 0;
  for (double v : k) s += v;
  EXPECT_NEAR(s, 1.0, 1e-14);
  EXPECT_EQ(k.size(), 9u);
  EXPECT_DOUBLE_EQ(k[0], k[8]);
}

TEST(Farneback, PolynomialExpansionRecoversQuadratic) {
  // f = 2 + 0.3 x - 0.2 y + 0.05 x^2 + 0.02 y^2 - 0.04 x y, exact away from the border.
  farneback_detail::Plane f(40, 40);
  for (int y = 0; y < 40; ++y)
    for (int x = 0; x < 40; ++x) {
      const double u = x - 20.0, v = y - 20.0;
      f(x, y) = 2 + 0.3 * u - 0.2 * v + 0.05 * u * u + 0.02 * v * v - 0.04 * u * v;
    }
  const auto poly = farneback_detail::polynomial_expansion(f, 5, 1.1);
  const auto& p = poly[20 * 40 + 20];
  EXPECT_NEAR(p.bx, 0.3, 1e-9);
  EXPECT_NEAR(p.by, -0.2, 1e-9);
  EXPECT_NEAR(p.axx, 0.05, 1e-9);
  EXPECT_NEAR(p.ayy, 0.02, 1e-9);
  EXPECT_NEAR(p.axy, -0.04, 1e-9);
}

TEST(MotionMagnitude, ClosedForms) {
  FlowField zero(8, 8);
  EXPECT_EQ(motion_magnitude(zero), 0.0);

  FlowField uniform(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) uniform.set(x, y, 3.0, 4.0);
  EXPECT_EQ(motion_magnitude(uniform), 5.0);

  FlowField half(8, 8);
  for (int y = 0; y < 8; ++y)
    for (int x = 4; x < 8; ++x) half.set(x, y, 0.0, 2.0);
  EXPECT_EQ(motion_magnitude(half), 1.0);

  ImageBuffer mask(8, 8, 1);
  for (int y = 0; y < 8; ++y) mask.at(6, y) = 1.0f;
  EXPECT_EQ(motion_magnitude(half, mask), 2.0);
  EXPECT_THROW(motion_magnitude(half, ImageBuffer(8, 8, 1)), InvalidInput);
}

TEST(MotionMagnitude, InteriorMaskBorders) {
  const ImageBuffer m = interior_mask(10, 8, 2);
  EXPECT_EQ(m.at(1, 4), 0.0f);
  EXPECT_EQ(m.at(2, 2), 1.0f);
  EXPECT_EQ(m.at(7, 5), 1.0f);
  EXPECT_EQ(m.at(8, 5), 0.0f);
  const ImageBuffer all = interior_mask(10, 8, 0);
  for (float v : all.data()) EXPECT_EQ(v, 1.0f);
}

}  // namespace
}  // namespace panolab
