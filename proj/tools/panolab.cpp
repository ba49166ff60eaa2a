// panolab command-line front end. Every subcommand writes a canonical JSON
// report whose "config" member can be passed back through --config.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "panolab/panolab.hpp"

namespace {

using panolab::io::Json;
namespace lora = panolab::lora;

constexpr const char* kVersion = "0.1.0";

enum Exit : int { kOk = 0, kInternal = 1, kInvalid = 2, kAssertion = 3 };

/// Reads a JSON object (or the "config" member of a report) as CLI11 config
/// items. Keys of root options go to the root, the rest to the active
/// subcommand. Underscores in keys stand for dashes in flag names.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    std::stringstream buf;
    buf << in.rdbuf();
    Json j;
    try {
      j = Json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError("config is not valid JSON: " + std::string(e.what()));
    }
    if (j.is_object() && j.contains("tool") && j.contains("config")) j = j["config"];
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");

    std::string sub;
    for (const auto* s : root_->get_subcommands()) sub = s->get_name();
    std::vector<CLI::ConfigItem> items;
    for (auto it = j.begin(); it != j.end(); ++it) {
      CLI::ConfigItem item;
      item.name = it.key();
      std::replace(item.name.begin(), item.name.end(), '_', '-');
      if (root_->get_option_no_throw("--" + item.name) == nullptr && !sub.empty()) item.parents = {sub};
      const auto& v = it.value();
      if (v.is_array()) {
        for (const auto& e : v) item.inputs.push_back(scalar(e, it.key()));
      } else {
        item.inputs.push_back(scalar(v, it.key()));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const Json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config key '" + key + "' must be a scalar or a list of scalars");
  }

  const CLI::App* root_;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  bool quiet = false;
  bool timestamp = false;
};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

Json envelope(const Globals& g, const std::string& command, Json config) {
  Json j;
  j["tool"] = {{"name", "panolab"}, {"version", kVersion}};
  j["command"] = command;
  if (g.timestamp) j["timestamp"] = utc_timestamp();
  Json c;
  c["seed"] = g.seed;
  for (auto it = config.begin(); it != config.end(); ++it) c[it.key()] = it.value();
  j["config"] = std::move(c);
  return j;
}

/// Report goes to --out when given (with a short summary on stdout),
/// otherwise to stdout.
void emit(const Globals& g, const Json& report, panolab::io::FloatStyle style, const std::string& summary) {
  const std::string text = panolab::io::canonical_json(report, style);
  if (!g.out.empty()) {
    panolab::io::write_text_atomically(g.out, text);
    if (!g.quiet) std::cout << summary;
  } else if (!g.quiet) {
    std::cout << text;
  }
}

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---------------------------------------------------------------------------

struct WarpArgs {
  std::string src, params, mask, interp = "bilinear";
  int width = 1024, height = 512, dof = 11;
};

int run_warp(const Globals& g, const WarpArgs& a) {
  if (g.out.empty()) throw panolab::InvalidInput("warp needs --out (.png or .pfm)");
  if (a.dof != 11 && a.dof != 8) throw panolab::InvalidInput("--dof must be 11 or 8");
  const auto mode = a.interp == "nearest" ? panolab::Interpolation::nearest : panolab::Interpolation::bilinear;
  auto params = panolab::io::load_warp_params(a.params);
  if (a.dof == 8) {
    if (params.pose.tz != 0.0 || params.pose.pitch_deg != 0.0 || params.pose.roll_deg != 0.0) {
      panolab::warn("8-DoF mode ignores tz, pitch_deg and roll_deg");
    }
    params.pose.tz = params.pose.pitch_deg = params.pose.roll_deg = 0.0;
  }
  const auto src = panolab::io::load_image(a.src);
  const auto res = panolab::warp_perspective_to_equirect(src, params.intrinsics, params.pose.pose(), params.scene,
                                                         a.width, a.height, mode);
  panolab::io::save_image(res.frame.image(), g.out);
  if (!a.mask.empty()) panolab::io::save_image(res.coverage, a.mask);

  Json cfg;
  cfg["src"] = a.src;
  cfg["params"] = a.params;
  cfg["mask"] = a.mask;
  cfg["width"] = a.width;
  cfg["height"] = a.height;
  cfg["interp"] = a.interp;
  cfg["dof"] = a.dof;
  Json report = envelope(g, "warp", cfg);
  report["params"] = panolab::io::warp_params_to_json(params);
  report["warp"] = {{"width", a.width},
                    {"height", a.height},
                    {"channels", res.frame.channels()},
                    {"coverage_fraction", res.coverage_fraction()},
                    {"solid_angle_fraction", res.solid_angle_fraction()}};
  if (!g.quiet) std::cout << panolab::io::canonical_json(report);
  return kOk;
}

struct SeamArgs {
  std::string frames;
  int strip_width = 2;
};

int run_seam(const Globals& g, const SeamArgs& a) {
  const auto seq = panolab::io::load_frame_sequence(a.frames);
  const auto frames = panolab::io::as_equirect(seq);
  const auto rep = panolab::seam_sequence(std::span<const panolab::EquirectFrame>(frames), a.strip_width);
  Json cfg;
  cfg["frames"] = a.frames;
  cfg["strip_width"] = a.strip_width;
  Json report = envelope(g, "seam", cfg);
  Json per = Json::array();
  for (std::size_t i = 0; i < rep.per_frame.size(); ++i) {
    per.push_back({{"file", seq.files[i].filename().string()}, {"score", rep.per_frame[i]}});
  }
  report["seam"] = {{"strip_width", a.strip_width}, {"frames", per}, {"mean", rep.mean}};
  emit(g, report, panolab::io::FloatStyle::fixed6, "mean " + fixed(rep.mean) + "\n");
  return kOk;
}

struct MotionArgs {
  std::string frames;
  panolab::CardinalMotionOptions opt;
};

Json view_json(const panolab::ViewMagnitudes& v) {
  return {{"front", v.front}, {"back", v.back}, {"left", v.left}, {"right", v.right}};
}

int run_motion(const Globals& g, const MotionArgs& a) {
  const auto seq = panolab::io::load_frame_sequence(a.frames);
  const auto frames = panolab::io::as_equirect(seq);
  const auto rep = panolab::cardinal_motion(std::span<const panolab::EquirectFrame>(frames), a.opt);
  const auto& f = a.opt.flow;
  Json cfg;
  cfg["frames"] = a.frames;
  cfg["fov"] = a.opt.fov_deg;
  cfg["crop"] = a.opt.crop_size;
  cfg["stride"] = a.opt.stride;
  cfg["pyr_scale"] = f.pyramid_scale;
  cfg["levels"] = f.levels;
  cfg["winsize"] = f.window_size;
  cfg["iterations"] = f.iterations;
  cfg["poly_n"] = f.poly_n;
  cfg["poly_sigma"] = f.poly_sigma;
  cfg["keep_border"] = !a.opt.exclude_border;
  Json report = envelope(g, "motion", cfg);
  Json pairs = Json::array();
  for (const auto& p : rep.per_pair) pairs.push_back(view_json(p));
  // Flow magnitudes are in crop pixels, so both resolutions go in the report.
  report["motion"] = {{"frames", frames.size()},
                      {"panorama_size", {seq.width, seq.height}},
                      {"view_size", {a.opt.crop_size, a.opt.crop_size}},
                      {"pairs", rep.per_pair.size()},
                      {"mean", view_json(rep.mean)},
                      {"per_pair", pairs}};
  std::ostringstream s;
  s << "front " << fixed(rep.mean.front) << "\nback " << fixed(rep.mean.back) << "\nleft " << fixed(rep.mean.left)
    << "\nright " << fixed(rep.mean.right) << '\n';
  emit(g, report, panolab::io::FloatStyle::fixed6, s.str());
  return kOk;
}

struct PoseArgs {
  std::string poses;
};

int run_pose_stats(const Globals& g, const PoseArgs& a) {
  const auto log = panolab::io::load_pose_csv(a.poses);
  const auto stats = panolab::pose_statistics(log);
  Json cfg;
  cfg["poses"] = a.poses;
  Json report = envelope(g, "pose-stats", cfg);
  Json rows = Json::array();
  std::ostringstream table;
  table << std::left << std::setw(18) << "Parameter" << std::setw(13) << "Symbol" << std::setw(6) << "Unit"
        << std::right << std::setw(14) << "Mean" << std::setw(14) << "Std" << '\n';
  for (const auto& st : stats) {
    rows.push_back(
        {{"parameter", st.parameter}, {"symbol", st.symbol}, {"unit", st.unit}, {"mean", st.mean}, {"std", st.std_dev}});
    table << std::left << std::setw(18) << st.parameter << std::setw(13) << st.symbol << std::setw(6) << st.unit
          << std::right << std::setw(14) << fixed(st.mean, 2) << std::setw(14) << fixed(st.std_dev, 2) << '\n';
  }
  report["records"] = log.records.size();
  report["pose_statistics"] = rows;
  if (g.out.empty() && !g.quiet) {
    std::cout << panolab::io::canonical_json(report);
    std::cerr << table.str();
  } else {
    emit(g, report, panolab::io::FloatStyle::fixed6, table.str());
  }
  return kOk;
}

struct LoraArgs {
  std::vector<int> dims{64, 32};
  std::string activation = "identity";
  std::vector<std::size_t> ranks;
  std::string placement = "full";
  double rel_tol = 1e-8;
  // rank-verify
  std::size_t trials = 100;
  std::string jacobian = "analytic";
  // dof-coverage
  std::size_t inputs = 32;
  double alpha = 1.0;
  double threshold = 1e-8;
  double family_rel_tol = 1e-6;
  int warp_width = 128;
  int warp_height = 64;
  int source_size = 128;
  double fov = 90.0;
};

Json rank_report_json(const lora::RankReport& r) {
  return {{"numerical_rank", r.numerical_rank},
          {"bound", r.bound},
          {"satisfied", r.satisfied},
          {"rel_tolerance", r.rel_tolerance},
          {"singular_values", r.singular_values}};
}

Json common_lora_config(const LoraArgs& a) {
  Json cfg;
  cfg["dims"] = a.dims;
  cfg["activation"] = a.activation;
  cfg["ranks"] = a.ranks;
  cfg["placement"] = a.placement;
  cfg["rel_tol"] = a.rel_tol;
  return cfg;
}

lora::JacobianMethod parse_method(const std::string& s) {
  if (s == "analytic") return lora::JacobianMethod::analytic;
  if (s == "finite_difference") return lora::JacobianMethod::finite_difference;
  if (s == "automatic") return lora::JacobianMethod::automatic;
  throw panolab::InvalidInput("unknown jacobian method '" + s + "'");
}

constexpr const char* kPlacementNote =
    "layers alternate attention-like (even index) and linear (odd index) roles; a toy analogy for adapter placement";

int run_rank_verify(const Globals& g, const LoraArgs& a) {
  lora::RankBoundConfig cfg;
  cfg.dims = a.dims;
  cfg.activation = lora::parse_activation(a.activation);
  cfg.ranks = a.ranks;
  cfg.placement = lora::parse_placement(a.placement);
  cfg.trials = a.trials;
  cfg.seed = g.seed;
  cfg.rel_tol = a.rel_tol;
  cfg.jacobian = parse_method(a.jacobian);
  const auto rep = lora::verify_rank_bound(cfg);

  Json echo = common_lora_config(a);
  echo["trials"] = a.trials;
  echo["jacobian"] = a.jacobian;
  Json report = envelope(g, "rank-verify", echo);
  report["placement_layers"] = kPlacementNote;
  Json per_rank = Json::array();
  for (std::size_t k = 0; k < cfg.ranks.size(); ++k) {
    std::size_t violations = 0, max_delta = 0;
    long min_margin = 0;
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      const auto& tr = rep.trials[k * cfg.trials + t];
      violations += tr.satisfied() ? 0 : 1;
      max_delta = std::max(max_delta, tr.delta_rank);
      min_margin = t == 0 ? tr.margin() : std::min(min_margin, tr.margin());
    }
    per_rank.push_back({{"rank", cfg.ranks[k]},
                        {"trials", cfg.trials},
                        {"violations", violations},
                        {"max_delta_rank", max_delta},
                        {"min_margin", min_margin}});
  }
  Json trials = Json::array();
  for (const auto& t : rep.trials) {
    trials.push_back({{"seed", t.seed},
                      {"rank", t.lora_rank},
                      {"jacobian_rank", t.jacobian_rank},
                      {"delta_rank", t.delta_rank},
                      {"bound", t.bound},
                      {"kink_warning", t.kink_warning},
                      {"singular_values", t.delta_spectrum}});
  }
  report["rank_bound"] = {{"trials_total", rep.trials.size()},
                          {"violations", rep.violations},
                          {"counterexample_seeds", rep.counterexample_seeds},
                          {"worst_margin", rep.worst_margin},
                          {"aggregate", rank_report_json(rep.aggregate)},
                          {"per_rank", per_rank},
                          {"trials", trials}};
  std::ostringstream s;
  s << "trials " << rep.trials.size() << "\nviolations " << rep.violations << "\nworst_margin " << rep.worst_margin
    << '\n';
  emit(g, report, panolab::io::FloatStyle::scientific6, s.str());
  if (!rep.passed()) {
    std::cerr << "error: rank bound violated in " << rep.violations << " trial(s); counterexample seed "
              << rep.counterexample_seeds.front() << '\n';
    return kAssertion;
  }
  return kOk;
}

int run_dof_coverage(const Globals& g, const LoraArgs& a) {
  lora::CoverageConfig cfg;
  cfg.dims = a.dims;
  cfg.activation = lora::parse_activation(a.activation);
  cfg.ranks = a.ranks;
  cfg.placement = lora::parse_placement(a.placement);
  cfg.seed = g.seed;
  cfg.rel_tol = a.rel_tol;
  cfg.family_rel_tol = a.family_rel_tol;
  cfg.inputs = a.inputs;
  cfg.alpha = a.alpha;
  cfg.threshold = a.threshold;
  cfg.warp_width = a.warp_width;
  cfg.warp_height = a.warp_height;
  cfg.source_size = a.source_size;
  cfg.fov_deg = a.fov;
  if (cfg.ranks.empty()) throw panolab::InvalidInput("rank list is empty");
  const auto sweep = lora::run_coverage_sweep(cfg);

  Json echo = common_lora_config(a);
  echo["inputs"] = a.inputs;
  echo["alpha"] = a.alpha;
  echo["threshold"] = a.threshold;
  echo["family_rel_tol"] = a.family_rel_tol;
  echo["warp_width"] = a.warp_width;
  echo["warp_height"] = a.warp_height;
  echo["source_size"] = a.source_size;
  echo["fov"] = a.fov;
  Json report = envelope(g, "dof-coverage", echo);
  report["target_family"] = rank_report_json(sweep.family_rank);
  report["placement_layers"] = kPlacementNote;
  Json rows = Json::array();
  std::ostringstream s;
  bool ok = sweep.family_rank.numerical_rank == 8;
  for (std::size_t k = 0; k < sweep.per_rank.size(); ++k) {
    const auto& r = sweep.per_rank[k];
    rows.push_back({{"rank", r.lora_rank},
                    {"target_dimension", r.target_dimension},
                    {"fit_residual", r.fit_residual},
                    {"covered", static_cast<bool>(sweep.covered[k])},
                    {"reachable_dimension", r.reachable_dimension},
                    {"jacobian_rank", r.jacobian_rank},
                    {"layers", r.layers},
                    {"residuals", r.residuals},
                    {"principal_angles", r.principal_angles},
                    {"reachable_spectrum", r.reachable_spectrum}});
    s << "rank " << r.lora_rank << " fit_residual " << std::scientific << std::setprecision(6) << r.fit_residual
      << (sweep.covered[k] ? " covered" : " not covered") << '\n';
    ok = ok && sweep.covered[k];
  }
  report["coverage"] = rows;
  emit(g, report, panolab::io::FloatStyle::scientific6, s.str());
  if (!ok) {
    if (sweep.family_rank.numerical_rank != 8) {
      std::cerr << "error: target family has numerical rank " << sweep.family_rank.numerical_rank << ", expected 8\n";
    }
    for (std::size_t k = 0; k < sweep.per_rank.size(); ++k) {
      if (!sweep.covered[k]) {
        std::cerr << "error: rank " << sweep.per_rank[k].lora_rank << " leaves fit residual "
                  << sweep.per_rank[k].fit_residual << " above threshold " << a.threshold << " (seed " << g.seed
                  << ")\n";
      }
    }
    return kAssertion;
  }
  return kOk;
}

/// Global flags repeated on a subcommand so they parse after it and show in
/// its --help. --config is only documented here; main() hoists it to the root.
void add_globals(CLI::App* sub, Globals& g, std::string& config_doc) {
  auto* grp = sub->add_option_group("Global");
  grp->add_option("--seed", g.seed, "Seed for randomized experiments");
  grp->add_option("--out", g.out, "Output path (report JSON, or the panorama for warp)");
  grp->add_flag("--quiet", g.quiet, "Print nothing on success");
  grp->add_flag("--timestamp", g.timestamp, "Add a UTC timestamp to the report");
  grp->add_option("--config", config_doc, "JSON config object, or a previous report to re-run");
}

std::vector<std::string> hoist_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::vector<std::string> front, rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      front.push_back(args[i]);
      front.push_back(args[++i]);
    } else if (args[i].rfind("--config=", 0) == 0) {
      front.push_back(args[i]);
    } else {
      rest.push_back(args[i]);
    }
  }
  front.insert(front.end(), rest.begin(), rest.end());
  return front;
}

void add_lora_common(CLI::App* sub, LoraArgs& a) {
  sub->add_option("--dims", a.dims, "Layer widths, input first")->expected(2, 64);
  sub->add_option("--activation", a.activation, "identity, relu or tanh");
  sub->add_option("--ranks", a.ranks, "Adapter ranks to test")->expected(1, 64);
  sub->add_option("--placement", a.placement, "attention_like_only, linear_only or full");
  sub->add_option("--rel-tol", a.rel_tol, "Numerical rank threshold relative to the largest singular value");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"panolab: perspective-to-panorama warps, panorama metrics and low-rank adapter experiments"};
  app.name("panolab");
  app.set_version_flag("--version", kVersion);
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for randomized experiments");
  app.add_option("--out", g.out, "Output path (report JSON, or the panorama for warp)");
  app.add_flag("--quiet", g.quiet, "Print nothing on success");
  app.add_flag("--timestamp", g.timestamp, "Add a UTC timestamp to the report");
  app.set_config("--config", "", "JSON config object, or a previous report to re-run");
  app.config_formatter(std::make_shared<JsonConfig>(&app));

  WarpArgs warp;
  auto* w = app.add_subcommand("warp", "Warp a perspective image onto an equirectangular panorama");
  w->add_option("--src", warp.src, "Perspective source image (.png or .pfm)")->required();
  w->add_option("--params", warp.params, "Camera parameter JSON")->required();
  w->add_option("--mask", warp.mask, "Optional coverage mask output (.png or .pfm)");
  w->add_option("--width", warp.width, "Panorama width");
  w->add_option("--height", warp.height, "Panorama height");
  w->add_option("--interp", warp.interp, "bilinear or nearest")->check(CLI::IsMember({"bilinear", "nearest"}));
  w->add_option("--dof", warp.dof, "11 for the full model, 8 to drop tz, pitch and roll")
      ->check(CLI::IsMember({8, 11}));

  SeamArgs seam;
  auto* s = app.add_subcommand("seam", "Left-right seam consistency of a panorama sequence");
  s->add_option("--frames", seam.frames, "Directory of equirect frames")->required();
  s->add_option("--strip-width", seam.strip_width, "Edge strip width in pixels");

  MotionArgs motion;
  auto* m = app.add_subcommand("motion", "Optical-flow motion magnitude in four cardinal views");
  m->add_option("--frames", motion.frames, "Directory of equirect frames")->required();
  m->add_option("--fov", motion.opt.fov_deg, "Field of view of each view, degrees");
  m->add_option("--crop", motion.opt.crop_size, "Side of each square view in pixels");
  m->add_option("--stride", motion.opt.stride, "Compare frames k and k + stride");
  m->add_option("--pyr-scale", motion.opt.flow.pyramid_scale, "Pyramid scale between levels");
  m->add_option("--levels", motion.opt.flow.levels, "Pyramid levels including full resolution");
  m->add_option("--winsize", motion.opt.flow.window_size, "Averaging window size");
  m->add_option("--iterations", motion.opt.flow.iterations, "Iterations per level");
  m->add_option("--poly-n", motion.opt.flow.poly_n, "Polynomial expansion neighborhood width");
  m->add_option("--poly-sigma", motion.opt.flow.poly_sigma, "Polynomial expansion Gaussian sigma");
  bool keep_border = false;
  m->add_flag("--keep-border", keep_border, "Include the flow border in the statistics");

  PoseArgs pose;
  auto* p = app.add_subcommand("pose-stats", "Mean and standard deviation of camera motion parameters");
  p->add_option("--poses", pose.poses, "Pose CSV (frame,tx,ty,tz,pitch_deg,yaw_deg,roll_deg)")->required();

  LoraArgs rank_args;
  rank_args.ranks = {1, 2, 4, 8, 16};
  auto* rv = app.add_subcommand("rank-verify", "Randomized check of the adapter output-change rank bound");
  add_lora_common(rv, rank_args);
  rv->add_option("--trials", rank_args.trials, "Trials per rank");
  rv->add_option("--jacobian", rank_args.jacobian, "analytic, finite_difference or automatic");

  LoraArgs cov_args;
  cov_args.ranks = {16};
  auto* dc = app.add_subcommand("dof-coverage", "Fit of the 8-parameter projection tangents by rank-r adapters");
  add_lora_common(dc, cov_args);
  dc->add_option("--inputs", cov_args.inputs, "Number of network inputs stacked per adapter");
  dc->add_option("--alpha", cov_args.alpha, "Adapter scale");
  dc->add_option("--threshold", cov_args.threshold, "Largest fit residual that counts as covered");
  dc->add_option("--family-rel-tol", cov_args.family_rel_tol, "Rank threshold for the target family");
  dc->add_option("--warp-width", cov_args.warp_width, "Panorama width used for the target family");
  dc->add_option("--warp-height", cov_args.warp_height, "Panorama height used for the target family");
  dc->add_option("--source-size", cov_args.source_size, "Side of the synthetic perspective source");
  dc->add_option("--fov", cov_args.fov, "Field of view of the base projection, degrees");

  std::string config_doc;
  for (auto* sub : {w, s, m, p, rv, dc}) add_globals(sub, g, config_doc);

  try {
    auto args = hoist_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }
  motion.opt.exclude_border = !keep_border;

  try {
    if (*w) return run_warp(g, warp);
    if (*s) return run_seam(g, seam);
    if (*m) return run_motion(g, motion);
    if (*p) return run_pose_stats(g, pose);
    if (*rv) return run_rank_verify(g, rank_args);
    if (*dc) return run_dof_coverage(g, cov_args);
  } catch (const panolab::NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInternal;
  } catch (const panolab::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
  return kInternal;
}
