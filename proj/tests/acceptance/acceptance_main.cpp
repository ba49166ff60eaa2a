// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "panolab/panolab.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace panolab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;  // 0 = no runtime limit
  std::function<Outcome()> check;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. seam metric on a panorama that closes around the sphere
Outcome seam_ground_truth() {
  const EquirectFrame frame = testing::textured_panorama(1024, 512);
  const double score = seam_consistency(frame);
  ImageBuffer copy = frame.image();
  for (int y = 0; y < copy.height(); ++y)
    for (int k = 0; k < 2; ++k)
      for (int c = 0; c < 3; ++c) copy.at(copy.width() - 2 + k, y, c) = copy.at(k, y, c);
  const double same = seam_consistency(EquirectFrame(std::move(copy)));
  return {score >= 0.995 && std::abs(same - 1.0) <= 1e-9,
          "score " + fmt("%.6f", score) + ", identical strips " + fmt("%.12f", same)};
}

// 2. parameter counts of the two camera models
Outcome dof_count() {
  static_assert(aggregate_arity_v<CameraIntrinsics> + aggregate_arity_v<PoseParameters> == 11);
  static_assert(CameraModel::dof == 11);
  static_assert(aggregate_arity_v<Projection8DoF> == 8);
  const bool ok = CameraModel::dof == 11 && Projection8DoF::names.size() == 8;
  return {ok, "full model " + std::to_string(CameraModel::dof) + " = " +
                  std::to_string(aggregate_arity_v<CameraIntrinsics>) + " intrinsic + " +
                  std::to_string(aggregate_arity_v<PoseParameters>) + " pose, simplified " +
                  std::to_string(aggregate_arity_v<Projection8DoF>)};
}

// 3. perspective -> panorama -> perspective
Outcome projection_round_trip() {
  const ImageBuffer src = testing::plane_image(256, 256, 3);
  const CameraIntrinsics k = CameraIntrinsics::from_fov(90.0, 256, 256);
  const auto pano = warp_perspective_to_equirect(src, k, CameraPose::identity(), SceneModel{}, 1024, 512);
  const ImageBuffer back = warp_equirect_to_perspective(pano.frame, k, CameraPose::identity(), 256, 256);
  ImageBuffer interior(256, 256, 1);
  for (int y = 16; y < 240; ++y)
    for (int x = 16; x < 240; ++x) interior.at(x, y) = 1.0f;
  const double psnr = testing::psnr(src, back, &interior);
  return {psnr > 30.0, "interior PSNR " + fmt("%.2f", psnr) + " dB"};
}

// 4. a 90 degree yaw of the camera is a column roll of the panorama
Outcome yaw_shift_equivalence() {
  const ImageBuffer src = testing::plane_image(256, 256, 3);
  const CameraIntrinsics k = CameraIntrinsics::from_fov(90.0, 256, 256);
  const auto base = warp_perspective_to_equirect(src, k, CameraPose::identity(), SceneModel{}, 1024, 512);
  const auto turned =
      warp_perspective_to_equirect(src, k, CameraPose::from_euler({90.0, 0.0, 0.0}), SceneModel{}, 1024, 512);
  const ImageBuffer rolled = yaw_shift(base.frame, 90.0).image();
  double worst = 0.0;
  for (std::size_t i = 0; i < rolled.size(); ++i)
    worst = std::max(worst, std::abs(double(rolled.data()[i]) - turned.frame.image().data()[i]));
  return {worst <= 1e-6, "max abs difference " + fmt("%.3e", worst)};
}

// 5. rank(dF) <= min(rank J, r) over 1000 trials
Outcome rank_bound() {
  lora::RankBoundConfig single;
  single.dims = {64, 32};
  single.ranks = {1, 2, 4, 8, 16};
  single.trials = 100;
  single.rel_tol = 1e-8;
  lora::RankBoundConfig deep = single;
  deep.dims = {64, 64, 64, 32};
  deep.activation = lora::Activation::tanh;
  const auto a = lora::verify_rank_bound(single);
  const auto b = lora::verify_rank_bound(deep);
  const std::size_t trials = a.trials.size() + b.trials.size();
  const std::size_t violations = a.violations + b.violations;
  return {trials == 1000 && violations == 0,
          std::to_string(trials) + " trials, " + std::to_string(violations) + " violations, tightest margins " +
              std::to_string(a.worst_margin) + " / " + std::to_string(b.worst_margin)};
}

// 6. rank-r adapters against the 8 projection tangent directions
Outcome dof_coverage() {
  lora::CoverageConfig cfg;  // single linear layer 64 -> 32, warp 128 x 64
  cfg.ranks = {5, 8, 16};
  const auto sweep = lora::run_coverage_sweep(cfg);
  const double r5 = sweep.per_rank[0].fit_residual;
  const double r8 = sweep.per_rank[1].fit_residual;
  const double r16 = sweep.per_rank[2].fit_residual;
  const bool ok = sweep.family_rank.numerical_rank == 8 && r8 < 1e-6 && r16 < 1e-6 && r5 > 0.05;
  return {ok, "family rank " + std::to_string(sweep.family_rank.numerical_rank) + ", residual r=5 " +
                  fmt("%.4f", r5) + ", r=8 " + fmt("%.2e", r8) + ", r=16 " + fmt("%.2e", r16)};
}

// 7. dense flow on a known 3 px shift
Outcome farneback_accuracy() {
  const ImageBuffer a = testing::plane_image(256, 256, 3);
  const ImageBuffer b = testing::plane_image(256, 256, 3, 3.0, 0.0);
  const FlowField f = farneback_flow(a, b);
  const int border = FarnebackParams{}.window_size;
  double dx = 0.0, ady = 0.0;
  int n = 0;
  for (int y = border; y < 256 - border; ++y)
    for (int x = border; x < 256 - border; ++x, ++n) {
      dx += f.dx(x, y);
      ady += std::abs(f.dy(x, y));
    }
  dx /= n;
  ady /= n;
  const double still = motion_magnitude(farneback_flow(a, a));
  const bool ok = dx >= 2.7 && dx <= 3.3 && ady < 0.3 && still < 0.05;
  return {ok, "mean dx " + fmt("%.4f", dx) + ", mean |dy| " + fmt("%.4f", ady) + ", identical frames " +
                  fmt("%.2e", still)};
}

// 8. moving sequence against its frozen first frame
Outcome cardinal_contrast() {
  std::vector<EquirectFrame> moving, frozen;
  for (int k = 0; k < 16; ++k) moving.push_back(testing::rotated_panorama(512, 256, 1.5 * k));
  for (int k = 0; k < 16; ++k) frozen.push_back(moving.front());
  CardinalMotionOptions opt;
  opt.crop_size = 256;
  const auto m = cardinal_motion(std::span<const EquirectFrame>(moving), opt).mean;
  const auto s = cardinal_motion(std::span<const EquirectFrame>(frozen), opt).mean;
  bool ok = true;
  std::string detail;
  const std::pair<const char*, double ViewMagnitudes::*> views[] = {
      {"front", &ViewMagnitudes::front}, {"back", &ViewMagnitudes::back},
      {"left", &ViewMagnitudes::left},   {"right", &ViewMagnitudes::right}};
  for (const auto& [name, slot] : views) {
    ok = ok && m.*slot >= 3.0 * s.*slot && m.*slot > 0.0;
    detail += std::string(detail.empty() ? "" : ", ") + name + " " + fmt("%.3f", m.*slot) + " vs " +
              fmt("%.1e", s.*slot);
  }
  return {ok, detail};
}

// 9. pose statistics against values fixed by construction
Outcome pose_statistics_check() {
  // Records come in mirrored pairs m + s u, m - s u, so the mean is m and
  // the sample variance is s^2 * sum(2 u^2) / (n - 1).
  const double m[] = {0.05, 1.3, -0.02, 2.5, 30.0, -1.25};
  const double sd[] = {0.2, 0.8, 0.05, 3.0, 45.0, 1.5};
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  PoseLog log;
  long double sum_sq[6] = {};
  for (long i = 0; i < 500; ++i) {
    double u[6];
    for (int c = 0; c < 6; ++c) {
      u[c] = g(rng);
      sum_sq[c] += 2.0L * u[c] * u[c];
    }
    log.records.push_back({2 * i, m[0] + sd[0] * u[0], m[1] + sd[1] * u[1], m[2] + sd[2] * u[2],
                           m[3] + sd[3] * u[3], m[4] + sd[4] * u[4], m[5] + sd[5] * u[5]});
    log.records.push_back({2 * i + 1, m[0] - sd[0] * u[0], m[1] - sd[1] * u[1], m[2] - sd[2] * u[2],
                           m[3] - sd[3] * u[3], m[4] - sd[4] * u[4], m[5] - sd[5] * u[5]});
  }
  const auto stats = pose_statistics(log);
  const char* rows[] = {"Horizontal shift", "Forward shift", "Vertical shift", "Pitch", "Yaw", "Roll"};
  double worst = 0.0;
  bool order = true;
  for (int c = 0; c < 6; ++c) {
    const double expected_sd = sd[c] * static_cast<double>(std::sqrt(sum_sq[c] / 999.0L));
    worst = std::max({worst, std::abs(stats[static_cast<std::size_t>(c)].mean - m[c]),
                      std::abs(stats[static_cast<std::size_t>(c)].std_dev - expected_sd)});
    order = order && stats[static_cast<std::size_t>(c)].parameter == rows[c];
  }
  return {order && worst <= 1e-9, "1000 records, worst deviation " + fmt("%.2e", worst) +
                                      (order ? ", row order matches" : ", row order differs")};
}

// 10. analytic against central-difference Jacobians
Outcome jacobian_agreement() {
  double worst = 0.0;
  int trials = 0;
  for (auto act : {lora::Activation::identity, lora::Activation::tanh}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed, ++trials) {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(act)}));
      const std::vector<int> dims{8, 12, 10, 6};
      const auto net = lora::LinearNetwork::random(dims, act, rng);
      const Eigen::VectorXd x = gaussian_vector(8, rng);
      worst = std::max(worst, lora::relative_frobenius_error(lora::analytic_jacobian(net, x),
                                                             lora::finite_difference_jacobian(net, x)));
    }
  }
  return {worst < 1e-6, std::to_string(trials) + " trials, worst relative error " + fmt("%.2e", worst)};
}

// 11. repeated CLI runs give identical bytes
struct Workspace {
  fs::path root = fs::temp_directory_path() / ("panolab_acceptance_" + std::to_string(::getpid()));
  Workspace() {
    fs::remove_all(root);
    fs::create_directories(root / "frames");
  }
  ~Workspace() {
    std::error_code ec;
    fs::remove_all(root, ec);
  }
};

int run(const std::string& args, const fs::path& stdout_file) {
  const std::string cmd = std::string(PANOLAB_CLI) + " " + args + " > '" + stdout_file.string() + "' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
  Workspace ws;
  const fs::path& d = ws.root;
  io::save_png(testing::plane_image(64, 64, 3), d / "src.png");
  std::ofstream(d / "params.json") << R"({"fx": 32, "fy": 32, "cx": 31.5, "cy": 31.5, "yaw_deg": 20, "tx": 0.1})";
  for (int k = 0; k < 3; ++k) {
    io::save_pfm(testing::rotated_panorama(256, 128, 2.0 * k).image(), d / "frames" / ("f" + std::to_string(k) + ".pfm"));
  }
  {
    std::ofstream csv(d / "poses.csv");
    csv << "frame,tx,ty,tz,pitch_deg,yaw_deg,roll_deg\n";
    for (int i = 0; i < 20; ++i) csv << i << ',' << 0.01 * i << ",0.5,0," << (i % 3) << ',' << 2.0 * i << ",0.1\n";
  }
  const auto q = [](const fs::path& p) { return "'" + p.string() + "'"; };
  struct Case {
    const char* name;
    std::string args;  // report path appended
    bool report_on_stdout;
  };
  const std::vector<Case> cases = {
      {"warp", "--seed 3 warp --src " + q(d / "src.png") + " --params " + q(d / "params.json") +
                   " --width 128 --height 64 --out ", true},
      {"seam", "--seed 3 seam --frames " + q(d / "frames") + " --out ", false},
      {"motion", "--seed 3 motion --frames " + q(d / "frames") + " --crop 64 --out ", false},
      {"pose-stats", "--seed 3 pose-stats --poses " + q(d / "poses.csv") + " --out ", false},
      {"rank-verify", "--seed 3 rank-verify --trials 5 --out ", false},
      {"dof-coverage", "--seed 3 dof-coverage --ranks 8 16 --out ", false},
  };
  bool ok = true;
  std::string detail;
  for (const auto& c : cases) {
    std::string bytes[2];
    bool ran = true;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path target = d / (std::string(c.name) + std::to_string(rep) + (c.report_on_stdout ? ".png" : ".json"));
      const fs::path out = d / "stdout.txt";
      ran = ran && run(c.args + q(target), out) == 0;
      bytes[rep] = io::read_text(c.report_on_stdout ? out : target);
      if (c.report_on_stdout) bytes[rep] += io::read_text(target);
    }
    const bool same = ran && !bytes[0].empty() && bytes[0] == bytes[1];
    ok = ok && same;
    detail += std::string(detail.empty() ? "" : ", ") + c.name + (same ? " same" : (ran ? " DIFFERS" : " FAILED"));
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "seam ground truth", 1.0, seam_ground_truth},
      {2, "degree-of-freedom count", 0.0, dof_count},
      {3, "projection round trip", 5.0, projection_round_trip},
      {4, "yaw and column shift", 5.0, yaw_shift_equivalence},
      {5, "rank bound", 60.0, rank_bound},
      {6, "projection coverage by rank", 120.0, dof_coverage},
      {7, "optical flow accuracy", 10.0, farneback_accuracy},
      {8, "cardinal motion contrast", 60.0, cardinal_contrast},
      {9, "pose statistics", 1.0, pose_statistics_check},
      {10, "jacobian agreement", 30.0, jacobian_agreement},
      {11, "cli determinism", 0.0, cli_determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.limit_s == 0.0 || secs < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::string timing = fmt("%.2f s", secs);
    if (c.limit_s > 0.0) timing += fmt(", limit %.0f s", c.limit_s);
    std::printf("[%s] %2d %s: %s (%s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str(),
                in_time ? "" : " too slow");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
