#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "panolab/core/error.hpp"
#include "panolab/core/image.hpp"

namespace panolab {

/// Cosine similarity between the leftmost and rightmost strip_width columns
/// of a panorama, each flattened row-major as (row, column, channel). A
/// frame that closes perfectly around +-180 degrees scores 1.
template <typename T>
double seam_consistency(const basic_equirect<T>& frame, int strip_width = 2) {
  const auto& img = frame.image();
  if (strip_width < 1) throw InvalidInput("strip width must be at least 1");
  if (img.width() < 2 * strip_width) throw InvalidInput("frame is narrower than two strips");
  if (img.channels() != 3) throw InvalidInput("seam consistency expects an RGB frame");

  const int right0 = img.width() - strip_width;
  double dot = 0.0, left_sq = 0.0, right_sq = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int k = 0; k < strip_width; ++k) {
      for (int c = 0; c < 3; ++c) {
        const double l = img.at(k, y, c);
        const double r = img.at(right0 + k, y, c);
        dot += l * r;
        left_sq += l * l;
        right_sq += r * r;
      }
    }
  }
  if (left_sq == 0.0 || right_sq == 0.0) {
    throw UndefinedSimilarity("seam strip is all zeros; cosine similarity is undefined");
  }
  if (left_sq == right_sq && dot == left_sq) return 1.0;
  return std::clamp(dot / (std::sqrt(left_sq) * std::sqrt(right_sq)), -1.0, 1.0);
}

struct SeamReport {
  std::vector<double> per_frame;
  double mean = 0.0;
};

template <typename T>
SeamReport seam_sequence(std::span<const basic_equirect<T>> frames, int strip_width = 2) {
  if (frames.empty()) throw InvalidInput("seam sequence needs at least one frame");
  SeamReport report;
  report.per_frame.reserve(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    const std::string where = "frame " + std::to_string(k) + ": ";
    if (!frames[k].image().same_shape(frames.front().image())) throw InvalidInput(where + "dimensions differ from frame 0");
    try {
      report.per_frame.push_back(seam_consistency(frames[k], strip_width));
    } catch (const UndefinedSimilarity& e) {
      throw UndefinedSimilarity(where + e.what());
    } catch (const InvalidInput& e) {
      throw InvalidInput(where + e.what());
    }
  }
  double sum = 0.0;
  for (double v : report.per_frame) sum += v;
  report.mean = sum / static_cast<double>(report.per_frame.size());
  return report;
}

}  // namespace panolab
