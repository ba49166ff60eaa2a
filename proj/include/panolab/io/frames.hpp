#pragma once

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include "panolab/core/error.hpp"
#include "panolab/core/image.hpp"
#include "panolab/io/pfm.hpp"
#include "panolab/io/png.hpp"

namespace panolab::io {

struct FrameSequence {
  fs::path directory;
  std::vector<fs::path> files;
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<ImageBuffer> frames;
};

inline ImageBuffer load_image(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png" || ext == ".PNG") return load_png(path);
  if (ext == ".pfm" || ext == ".PFM") return load_pfm(path);
  throw InvalidInput("unsupported image extension for " + path.string() + " (expected .png or .pfm)");
}

inline void save_image(const ImageBuffer& img, const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".png" || ext == ".PNG") return save_png(img, path);
  if (ext == ".pfm" || ext == ".PFM") return save_pfm(img, path);
  throw InvalidInput("unsupported image extension for " + path.string() + " (expected .png or .pfm)");
}

/// Image files (.png, .pfm) of a directory in byte-wise filename order.
inline std::vector<fs::path> list_frame_files(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".pfm" || ext == ".PNG" || ext == ".PFM") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

inline FrameSequence load_frame_sequence(const fs::path& dir) {
  FrameSequence seq;
  seq.directory = dir;
  seq.files = list_frame_files(dir);
  if (seq.files.empty()) throw InvalidInput("no .png or .pfm frames in " + dir.string());
  for (const auto& f : seq.files) {
    ImageBuffer img = load_image(f);
    if (seq.frames.empty()) {
      seq.width = img.width();
      seq.height = img.height();
      seq.channels = img.channels();
    } else if (img.width() != seq.width || img.height() != seq.height || img.channels() != seq.channels) {
      throw InvalidInput("frame " + f.filename().string() + " is " + std::to_string(img.width()) + "x" +
                         std::to_string(img.height()) + "x" + std::to_string(img.channels()) + ", expected " +
                         std::to_string(seq.width) + "x" + std::to_string(seq.height) + "x" +
                         std::to_string(seq.channels));
    }
    seq.frames.push_back(std::move(img));
  }
  return seq;
}

inline std::vector<EquirectFrame> as_equirect(const FrameSequence& seq) {
  std::vector<EquirectFrame> out;
  out.reserve(seq.frames.size());
  for (const auto& f : seq.frames) out.emplace_back(f);
  return out;
}

}  // namespace panolab::io
