#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "panolab/geometry.hpp"
#include "panolab/metrics/seam.hpp"
#include "support/synthetic.hpp"

namespace panolab {
namespace {

// Cosine similarity of two column ranges, flattened (row, column, channel);
// columns are taken modulo the width.
double strip_cosine(const ImageBuffer& img, int a0, int b0, int strip) {
  const int w = img.width();
  double dot = 0, na = 0, nb = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int k = 0; k < strip; ++k)
      for (int c = 0; c < img.channels(); ++c) {
        const double a = img.at(((a0 + k) % w + w) % w, y, c);
        const double b = img.at(((b0 + k) % w + w) % w, y, c);
        dot += a * b;
        na += a * a;
        nb += b * b;
      }
  return dot / std::sqrt(na * nb);
}

TEST(Seam, IdenticalStripsScoreExactlyOne) {
  ImageBuffer img = testing::noise_image(64, 32, 3, 1);
  for (int y = 0; y < 32; ++y)
    for (int c = 0; c < 3; ++c) {
      img.at(0, y, c) = img.at(62, y, c);
      img.at(1, y, c) = img.at(63, y, c);
    }
  EXPECT_NEAR(seam_consistency(EquirectFrame(img)), 1.0, 1e-9);
}

TEST(Seam, SphericalTextureClosesTheSeam) {
  EXPECT_GE(seam_consistency(testing::textured_panorama(1024, 512)), 0.995);
}

TEST(Seam, CosineIgnoresScaleAndDetectsOrthogonality) {
  ImageBuffer img(16, 8, 3, 0.3f);
  for (int y = 0; y < 8; ++y)
    for (int c = 0; c < 3; ++c) {
      img.at(0, y, c) = img.at(1, y, c) = 1.0f;
      img.at(14, y, c) = img.at(15, y, c) = 0.5f;
    }
  EXPECT_NEAR(seam_consistency(EquirectFrame(img)), 1.0, 1e-12);

  // Alternating pattern [1,0,1,0,...] on the left, [0,1,0,1,...] on the right.
  ImageBuffer alt(16, 8, 3, 0.3f);
  int i = 0;
  for (int y = 0; y < 8; ++y)
    for (int k = 0; k < 2; ++k)
      for (int c = 0; c < 3; ++c, ++i) {
        alt.at(k, y, c) = (i % 2 == 0) ? 1.0f : 0.0f;
        alt.at(14 + k, y, c) = (i % 2 == 0) ? 0.0f : 1.0f;
      }
  EXPECT_NEAR(seam_consistency(EquirectFrame(alt)), 0.0, 1e-12);
}

TEST(Seam, ScaleInvariant) {
  const auto pano = testing::textured_panorama(128, 64);
  ImageBuffer scaled = pano.image();
  for (auto& v : scaled.data()) v *= 0.37f;
  EXPECT_NEAR(seam_consistency(EquirectFrame(scaled)), seam_consistency(pano), 1e-9);
}

TEST(Seam, ShiftedFrameMatchesIndexOracle) {
  const ImageBuffer img = testing::noise_image(96, 48, 3, 4);
  const EquirectFrame frame(img);
  const int w = 96;
  for (int strip : {1, 2, 4}) {
    for (int k : {0, 1, 5, 17, 48, 95}) {
      const double via_shift = seam_consistency(yaw_shift(frame, 360.0 * k / w), strip);
      EXPECT_NEAR(via_shift, strip_cosine(img, w - k - strip, w - k, strip), 1e-9) << "k=" << k;
    }
  }
}

TEST(Seam, RejectsZeroStripAndBadShapes) {
  ImageBuffer img(16, 8, 3, 0.5f);
  for (int y = 0; y < 8; ++y)
    for (int c = 0; c < 3; ++c) img.at(0, y, c) = img.at(1, y, c) = 0.0f;
  EXPECT_THROW(seam_consistency(EquirectFrame(img)), UndefinedSimilarity);
  EXPECT_THROW(seam_consistency(EquirectFrame(ImageBuffer(16, 8, 1, 0.5f))), InvalidInput);
  EXPECT_THROW(seam_consistency(EquirectFrame(ImageBuffer(16, 8, 3, 0.5f)), 0), InvalidInput);
  EXPECT_THROW(seam_consistency(EquirectFrame(ImageBuffer(16, 8, 3, 0.5f)), 9), InvalidInput);
}

TEST(SeamSequence, MeanOfIdenticalFramesIsOne) {
  const auto pano = testing::textured_panorama(128, 64);
  ImageBuffer closed = pano.image();
  for (int y = 0; y < 64; ++y)
    for (int c = 0; c < 3; ++c) {
      closed.at(0, y, c) = closed.at(126, y, c);
      closed.at(1, y, c) = closed.at(127, y, c);
    }
  const std::vector<EquirectFrame> frames(5, EquirectFrame(closed));
  const auto rep = seam_sequence(std::span<const EquirectFrame>(frames));
  ASSERT_EQ(rep.per_frame.size(), 5u);
  EXPECT_NEAR(rep.mean, 1.0, 1e-12);
}

TEST(SeamSequence, NoisyRightStripDropsOnlyThatFrame) {
  std::vector<EquirectFrame> frames;
  for (int k = 0; k < 4; ++k) frames.push_back(testing::textured_panorama(256, 128, 0.3 * k));
  ImageBuffer noisy = frames[2].image();
  const ImageBuffer noise = testing::noise_image(256, 128, 3, 99);
  for (int y = 0; y < 128; ++y)
    for (int x = 254; x < 256; ++x)
      for (int c = 0; c < 3; ++c) noisy.at(x, y, c) = noise.at(x, y, c);
  frames[2] = EquirectFrame(noisy);
  const auto rep = seam_sequence(std::span<const EquirectFrame>(frames));
  for (int k = 0; k < 4; ++k) {
    if (k == 2) EXPECT_LT(rep.per_frame[2], 0.9);
    else EXPECT_GE(rep.per_frame[static_cast<std::size_t>(k)], 0.995);
  }
  double sum = 0;
  for (double v : rep.per_frame) sum += v;
  EXPECT_NEAR(rep.mean, sum / 4.0, 1e-12);
}

TEST(SeamSequence, SingleFrameAndErrors) {
  const std::vector<EquirectFrame> one{testing::textured_panorama(64, 32)};
  const auto rep = seam_sequence(std::span<const EquirectFrame>(one));
  ASSERT_EQ(rep.per_frame.size(), 1u);
  EXPECT_EQ(rep.mean, rep.per_frame[0]);
  EXPECT_THROW(seam_sequence(std::span<const EquirectFrame>()), InvalidInput);
  const std::vector<EquirectFrame> mixed{testing::textured_panorama(64, 32), testing::textured_panorama(128, 64)};
  EXPECT_THROW(seam_sequence(std::span<const EquirectFrame>(mixed)), InvalidInput);
}

}  // namespace
}  // namespace panolab
