// erpm: command-line front end of the erpmotion toolkit.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "erpmotion/curation.hpp"
#include "erpmotion/decouple.hpp"
#include "erpmotion/erp_ops.hpp"
#include "erpmotion/error.hpp"
#include "erpmotion/flow.hpp"
#include "erpmotion/flow_estimator.hpp"
#include "erpmotion/image_io.hpp"
#include "erpmotion/metrics.hpp"
#include "erpmotion/noise.hpp"
#include "erpmotion/parallel.hpp"
#include "erpmotion/rng.hpp"
#include "erpmotion/synth.hpp"

namespace erpm {
namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Params {
  BlockMatchParams flow;
  RotationEstimateParams rotation;
  CurationConfig curation;
  int noise_channels = 4;
  std::optional<double> gamma;
};

// Flat configuration keys. Each binds to a Params field and to the command
// line options that override it.
class ConfigKeys {
 public:
  template <typename T>
  void add(const std::string& key, T& field) {
    entries_[key].set = [&field, key](const nlohmann::json& v) {
      try {
        field = v.get<T>();
      } catch (const nlohmann::json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
      }
    };
  }
  void add_gamma(const std::string& key, std::optional<double>& field) {
    entries_[key].set = [&field, key](const nlohmann::json& v) {
      if (!v.is_number()) throw ConfigError("config key '" + key + "' must be a number");
      field = v.get<double>();
    };
  }

  void bind(const std::string& key, CLI::Option* opt) { entries_.at(key).options.push_back(opt); }

  // Applies every key of the file unless one of its options was given.
  void apply(const std::filesystem::path& path) const {
    std::ifstream is(path);
    if (!is) throw FormatError(path.string() + ": cannot open config");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError(path.string() + ": config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      const auto it = entries_.find(key);
      if (it == entries_.end()) throw ConfigError(path.string() + ": unknown config key '" + key + "'");
      bool overridden = false;
      for (const CLI::Option* o : it->second.options) overridden = overridden || o->count() > 0;
      if (!overridden) it->second.set(value);
    }
  }

 private:
  struct Entry {
    std::function<void(const nlohmann::json&)> set;
    std::vector<CLI::Option*> options;
  };
  std::map<std::string, Entry> entries_;
};

std::vector<ErpImage> load_images(const std::filesystem::path& p) {
  if (std::filesystem::is_directory(p)) {
    auto frames = read_frames(p);
    if (frames.empty()) throw FormatError(p.string() + ": no frames found");
    return frames;
  }
  return {read_frame(p)};
}

std::vector<std::filesystem::path> list_files(const std::filesystem::path& dir, const std::string& ext) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<FlowField> load_flows(const std::filesystem::path& p) {
  if (!std::filesystem::is_directory(p)) return {read_flo(p)};
  std::vector<FlowField> flows;
  for (const auto& f : list_files(p, ".flo")) flows.push_back(read_flo(f));
  if (flows.empty()) throw FormatError(p.string() + ": no .flo files found");
  return flows;
}

void write_flows(const std::vector<FlowField>& flows, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t t = 0; t < flows.size(); ++t) write_flo(flows[t], dir / frame_name("flow", t, "flo"));
}

std::string format_ext(const std::string& format) {
  if (format != "png" && format != "erpf") throw ConfigError("format must be png or erpf");
  return format;
}

void emit_json(const nlohmann::ordered_json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream os(out, std::ios::binary);
  if (!os) throw FormatError(out + ": cannot open for writing");
  os << j.dump(2) << "\n";
}

std::vector<double> parse_numbers(const std::string& s, std::size_t n, const std::string& what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(what + ": '" + s + "' is not a list of numbers");
    }
  }
  if (v.size() != n) throw ConfigError(what + ": expected " + std::to_string(n) + " comma-separated values");
  return v;
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ConfigError(flag + " is required");
}

int run(int argc, char** argv) {
  CLI::App app{"Toolkit for motion processing on equirectangular 360-degree video."};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  Params P;
  ConfigKeys keys;
  keys.add("flow.levels", P.flow.levels);
  keys.add("flow.radius", P.flow.radius);
  keys.add("flow.block", P.flow.block);
  keys.add("rotation.stride", P.rotation.stride);
  keys.add("rotation.irls_rounds", P.rotation.irls_rounds);
  keys.add("rotation.huber_scale", P.rotation.huber_scale);
  keys.add("noise.channels", P.noise_channels);
  keys.add_gamma("degrade.gamma", P.gamma);
  CurationConfig& C = P.curation;
  keys.add("curation.stereo_threshold", C.stereo_threshold);
  keys.add("curation.fisheye_threshold", C.fisheye_threshold);
  keys.add("curation.black_level", C.black_level);
  keys.add("curation.motion_threshold", C.motion_threshold);
  keys.add("curation.min_clip_s", C.min_clip_s);
  keys.add("curation.max_clip_s", C.max_clip_s);
  keys.add("curation.transition_trim_s", C.transition_trim_s);
  keys.add("curation.resize_min_dim", C.resize_min_dim);
  keys.add("curation.frames_sampled_per_check", C.frames_sampled_per_check);
  keys.add("curation.transition_threshold", C.transition_threshold);
  keys.add("curation.transition_min_dim", C.transition_min_dim);
  keys.add("curation.max_clips_per_video", C.max_clips_per_video);
  keys.add("curation.min_rotation_deg_per_s", C.min_rotation_deg_per_s);

  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--config", config_path, "JSON object of flat parameter keys (e.g. \"flow.radius\": 4)");
  app.add_option("--seed", seed, "Top-level seed; every stage derives its own stream from it");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto add_flow_opts = [&](CLI::App* sub) {
    keys.bind("flow.levels", sub->add_option("--levels", P.flow.levels, "Pyramid levels (0 = ceil(log2(min(H,W)/16)))"));
    keys.bind("flow.radius", sub->add_option("--radius", P.flow.radius, "Integer search radius per level"));
    keys.bind("flow.block", sub->add_option("--block", P.flow.block, "Block size in pixels"));
  };
  auto add_rotation_opts = [&](CLI::App* sub) {
    keys.bind("rotation.stride", sub->add_option("--stride", P.rotation.stride, "Sampling stride of rotation fit"));
    keys.bind("rotation.irls_rounds",
              sub->add_option("--irls-rounds", P.rotation.irls_rounds, "Huber reweighting rounds"));
    keys.bind("rotation.huber_scale",
              sub->add_option("--huber-scale", P.rotation.huber_scale, "Huber threshold / median residual"));
  };

  // synth
  auto* synth = app.add_subcommand("synth", "Render a procedural scene with ground-truth flows");
  std::string scene_path, synth_out, synth_format = "png";
  synth->add_option("--scene", scene_path, "Scene JSON")->required();
  synth->add_option("--out", synth_out, "Output directory (frames/, flows/, track.json)")->required();
  synth->add_option("--format", synth_format, "Frame format: png or erpf");

  // flow
  auto* flow = app.add_subcommand("flow", "Estimate optical flow between two frames");
  std::string flow_a, flow_b, flow_out;
  flow->add_option("--a", flow_a, "First frame")->required();
  flow->add_option("--b", flow_b, "Second frame")->required();
  flow->add_option("--out", flow_out, "Output .flo")->required();
  add_flow_opts(flow);

  // decouple
  auto* dec = app.add_subcommand("decouple", "Estimate and remove camera rotation from a frame sequence");
  std::string dec_frames, dec_out, dec_format = "png";
  dec->add_option("--frames", dec_frames, "Directory of frames")->required();
  dec->add_option("--out", dec_out, "Output directory (derotated/, flows/, track.json)")->required();
  dec->add_option("--format", dec_format, "Frame format: png or erpf");
  add_flow_opts(dec);
  add_rotation_opts(dec);

  // rerotate
  auto* rer = app.add_subcommand("rerotate", "Apply a rotation track to frames");
  std::string rer_frames, rer_track, rer_out, rer_format = "png";
  rer->add_option("--frames", rer_frames, "Directory of frames")->required();
  rer->add_option("--track", rer_track, "Rotation track JSON")->required();
  rer->add_option("--out", rer_out, "Output directory")->required();
  rer->add_option("--format", rer_format, "Frame format: png or erpf");

  // rotflow
  auto* rotf = app.add_subcommand("rotflow", "Write the analytic flow of a camera rotation");
  std::string rot_euler, rot_quat, rot_out;
  int rot_h = 480, rot_w = 960;
  rotf->add_option("--euler", rot_euler, "yaw,pitch,roll in degrees");
  rotf->add_option("--quat", rot_quat, "w,x,y,z unit quaternion");
  rotf->add_option("--height", rot_h, "Height");
  rotf->add_option("--width", rot_w, "Width (must be 2 x height)");
  rotf->add_option("--out", rot_out, "Output .flo")->required();

  // warp-noise
  auto* wn = app.add_subcommand("warp-noise", "Warp Gaussian noise along a flow sequence");
  std::string wn_flows, wn_init, wn_out;
  wn->add_option("--flows", wn_flows, "Directory of .flo files (or one file)")->required();
  wn->add_option("--init", wn_init, "Initial noise grid (default: sampled from the seed)");
  keys.bind("noise.channels", wn->add_option("--channels", P.noise_channels, "Channels of sampled noise"));
  wn->add_option("--out", wn_out, "Output directory of noise_NNNN.erpf")->required();

  // degrade
  auto* deg = app.add_subcommand("degrade", "Blend fresh noise into a noise grid");
  std::string deg_in, deg_out;
  deg->add_option("--in", deg_in, "Input noise grid")->required();
  deg->add_option("--out", deg_out, "Output noise grid")->required();
  keys.bind("degrade.gamma",
            deg->add_option("--gamma", P.gamma, "Blend weight in [0,1] (default: uniform draw from the seed)"));

  // roll / unroll
  auto* roll = app.add_subcommand("roll", "Cyclic longitude roll by theta degrees");
  double roll_theta = 0.0;
  int roll_width = 0;
  std::string roll_in, roll_out;
  roll->add_option("--theta", roll_theta, "Angle in degrees")->required();
  roll->add_option("--width", roll_width, "Raster width when no input is given");
  roll->add_option("--in", roll_in, "Input raster (.erpf or .png)");
  roll->add_option("--out", roll_out, "Output raster");

  auto* unr = app.add_subcommand("unroll", "Undo an accumulated longitude roll");
  long long unroll_shift = 0;
  std::string unr_in, unr_out;
  unr->add_option("--shift", unroll_shift, "Accumulated shift in columns")->required();
  unr->add_option("--in", unr_in, "Input raster")->required();
  unr->add_option("--out", unr_out, "Output raster")->required();

  // metric
  auto* metric = app.add_subcommand("metric", "Quality and loop-consistency metrics (JSON report)");
  metric->require_subcommand(1);
  std::string m_a, m_b, m_out, m_est, m_ref;
  bool m_zero = false;
  auto* m_psnr = metric->add_subcommand("psnr", "PSNR per frame pair");
  auto* m_ssim = metric->add_subcommand("ssim", "SSIM per frame pair");
  for (auto* sub : {m_psnr, m_ssim}) {
    sub->add_option("--a", m_a, "Frame or directory")->required();
    sub->add_option("--b", m_b, "Frame or directory")->required();
    sub->add_option("--out", m_out, "Report path (default: stdout)");
  }
  auto* m_epe = metric->add_subcommand("epe", "End-point error per flow pair");
  m_epe->add_option("--est", m_est, ".flo file or directory")->required();
  auto* ref_opt = m_epe->add_option("--ref", m_ref, ".flo file or directory");
  m_epe->add_flag("--zero", m_zero, "Compare against the zero field")->excludes(ref_opt);
  m_epe->add_option("--out", m_out, "Report path (default: stdout)");
  auto* m_end = metric->add_subcommand("endcont", "MSE between first and last columns per frame");
  m_end->add_option("--frames", m_a, "Frame or directory")->required();
  m_end->add_option("--out", m_out, "Report path (default: stdout)");

  // flowvis
  auto* vis = app.add_subcommand("flowvis", "Color-wheel visualization of a .flo");
  std::string vis_in, vis_out;
  std::optional<double> vis_max;
  vis->add_option("--flow", vis_in, "Input .flo")->required();
  vis->add_option("--out", vis_out, "Output .png")->required();
  vis->add_option("--max-mag", vis_max, "Saturation scale (default: 99th percentile)");

  // curate
  auto* cur = app.add_subcommand("curate", "Filter and segment a corpus of frame directories");
  std::string cur_corpus, cur_out, cur_work;
  cur->add_option("--corpus", cur_corpus, "Corpus directory (one subdirectory per video)")->required();
  cur->add_option("--out", cur_out, "Manifest (.jsonl)")->required();
  cur->add_option("--work-dir", cur_work, "Directory for per-video results and completion markers");
  keys.bind("curation.stereo_threshold", cur->add_option("--stereo-threshold", C.stereo_threshold, "Discard above this left/right SSIM"));
  keys.bind("curation.fisheye_threshold", cur->add_option("--fisheye-threshold", C.fisheye_threshold, "Discard above this black fraction"));
  keys.bind("curation.black_level", cur->add_option("--black-level", C.black_level, "Grayscale below this counts as black"));
  keys.bind("curation.motion_threshold", cur->add_option("--motion-threshold", C.motion_threshold, "Minimum mean flow magnitude (px/frame)"));
  keys.bind("curation.min_clip_s", cur->add_option("--min-clip-s", C.min_clip_s, "Minimum clip duration (s)"));
  keys.bind("curation.max_clip_s", cur->add_option("--max-clip-s", C.max_clip_s, "Maximum clip duration (s)"));
  keys.bind("curation.transition_trim_s", cur->add_option("--transition-trim-s", C.transition_trim_s, "Frames removed around a transition (s)"));
  keys.bind("curation.resize_min_dim", cur->add_option("--resize-min-dim", C.resize_min_dim, "Minimum dimension for motion scoring"));
  keys.bind("curation.frames_sampled_per_check", cur->add_option("--frames-sampled-per-check", C.frames_sampled_per_check, "Frames sampled for format checks"));
  keys.bind("curation.transition_threshold", cur->add_option("--transition-threshold", C.transition_threshold, "Mean absolute grayscale difference of a cut"));
  keys.bind("curation.transition_min_dim", cur->add_option("--transition-min-dim", C.transition_min_dim, "Minimum dimension for transition detection"));
  keys.bind("curation.max_clips_per_video", cur->add_option("--max-clips-per-video", C.max_clips_per_video, "Kept clips per video"));
  keys.bind("curation.min_rotation_deg_per_s", cur->add_option("--min-rotation-deg-per-s", C.min_rotation_deg_per_s, "Minimum camera rotation speed (0 = off)"));
  add_flow_opts(cur);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  set_parallelism(jobs);
  if (!config_path.empty()) keys.apply(config_path);
  C.seed = derive_seed(seed, "curation");
  C.flow = P.flow;
  DecoupleParams dparams{P.flow, P.rotation};

  if (synth->parsed()) {
    std::ifstream is(scene_path);
    if (!is) throw FormatError(scene_path + ": cannot open scene");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(scene_path + ": " + e.what());
    }
    if (j.is_object() && !j.contains("seed")) j["seed"] = seed;
    const SceneSpec spec = scene_from_json(j);
    const std::filesystem::path out = synth_out;
    write_frames(render(spec), out / "frames", "frame", format_ext(synth_format));
    write_flows(gt_flows(spec), out / "flows");
    write_track(spec.camera, spec.height, spec.width, out / "track.json");
  } else if (flow->parsed()) {
    write_flo(estimate_flow(read_frame(flow_a), read_frame(flow_b), P.flow), flow_out);
  } else if (dec->parsed()) {
    const auto frames = load_images(dec_frames);
    const DecoupleResult r = decouple_pipeline(frames, dparams);
    const std::filesystem::path out = dec_out;
    write_frames(r.derotated, out / "derotated", "frame", format_ext(dec_format));
    write_flows(r.derotated_flows, out / "flows");
    write_track(r.track, frames.front().height(), frames.front().width(), out / "track.json");
  } else if (rer->parsed()) {
    const auto frames = load_images(rer_frames);
    const LoadedTrack t = read_track(rer_track);
    write_frames(rerotate_frames(frames, t.track), rer_out, "frame", format_ext(rer_format));
  } else if (rotf->parsed()) {
    if (rot_euler.empty() == rot_quat.empty()) throw ConfigError("rotflow: give exactly one of --euler or --quat");
    Rotation r;
    if (!rot_euler.empty()) {
      const auto e = parse_numbers(rot_euler, 3, "--euler");
      r = rotation_from_euler(e[0], e[1], e[2]);
    } else {
      const auto q = parse_numbers(rot_quat, 4, "--quat");
      r = Rotation::from_quaternion({q[0], q[1], q[2], q[3]});
    }
    write_flo(rotation_flow(r, rot_h, rot_w).pixel, rot_out);
  } else if (wn->parsed()) {
    const auto flows = load_flows(wn_flows);
    NoiseGrid q0 = wn_init.empty() ? sample_noise(flows.front().height(), flows.front().width(), P.noise_channels,
                                                  derive_seed(seed, "sample-noise"))
                                   : read_noise(wn_init);
    const auto chain = warp_chain(q0, flows, derive_seed(seed, "warp-fill"));
    const std::filesystem::path out = wn_out;
    std::filesystem::create_directories(out);
    for (std::size_t t = 0; t < chain.size(); ++t) write_noise(chain[t], out / frame_name("noise", t, "erpf"));
  } else if (deg->parsed()) {
    const double gamma = P.gamma ? *P.gamma : CounterRng(derive_seed(seed, "degrade-gamma")).uniform(0);
    const NoiseGrid q = degrade(read_noise(deg_in), gamma, derive_seed(seed, "degrade"));
    write_noise(q, deg_out);
    std::cout << "gamma " << gamma << "\n";
  } else if (roll->parsed()) {
    if (roll_in.empty()) {
      if (roll_width <= 0) throw ConfigError("roll: give --width or --in");
      const int shift = longitude_shift(roll_theta, roll_width);
      std::cout << "shift " << shift << "\n";
    } else {
      require(roll_out, "--out");
      const FloatRaster in = std::filesystem::path(roll_in).extension() == ".erpf"
                                 ? read_erpf(std::filesystem::path(roll_in))
                                 : FloatRaster(read_frame(roll_in));
      const RolledGrid r = roll_longitude(in, roll_theta);
      if (std::filesystem::path(roll_out).extension() == ".erpf") {
        write_erpf(r.grid, std::filesystem::path(roll_out));
      } else {
        write_frame(ErpImage(r.grid), roll_out);
      }
      std::cout << "shift " << r.shift << "\n";
    }
  } else if (unr->parsed()) {
    const FloatRaster in = std::filesystem::path(unr_in).extension() == ".erpf"
                               ? read_erpf(std::filesystem::path(unr_in))
                               : FloatRaster(read_frame(unr_in));
    const FloatRaster out = unroll(in, unroll_shift);
    if (std::filesystem::path(unr_out).extension() == ".erpf") {
      write_erpf(out, std::filesystem::path(unr_out));
    } else {
      write_frame(ErpImage(out), unr_out);
    }
  } else if (metric->parsed()) {
    MetricReport report;
    if (m_psnr->parsed() || m_ssim->parsed()) {
      const auto a = load_images(m_a);
      const auto b = load_images(m_b);
      if (a.size() != b.size() && a.size() != 1 && b.size() != 1) {
        throw ShapeError("metric: " + m_a + " and " + m_b + " hold different frame counts");
      }
      const std::size_t n = std::max(a.size(), b.size());
      std::vector<double> v;
      for (std::size_t t = 0; t < n; ++t) {
        const ErpImage& x = a[a.size() == 1 ? 0 : t];
        const ErpImage& y = b[b.size() == 1 ? 0 : t];
        v.push_back(m_psnr->parsed() ? psnr(x, y) : ssim(x, y));
      }
      if (m_psnr->parsed()) {
        report = MetricReport::from_values("psnr", v, {{"peak", 1.0}});
      } else {
        const SsimParams sp;
        report = MetricReport::from_values(
            "ssim", v, {{"window", sp.window}, {"sigma", sp.sigma}, {"k1", sp.k1}, {"k2", sp.k2}});
      }
    } else if (m_epe->parsed()) {
      if (!m_zero) require(m_ref, "--ref or --zero");
      const auto est = load_flows(m_est);
      std::vector<double> v;
      if (m_zero) {
        for (const auto& f : est) v.push_back(epe(f, FlowField(f.height(), f.width())));
      } else {
        const auto ref = load_flows(m_ref);
        if (ref.size() != est.size()) throw ShapeError("metric epe: " + m_est + " and " + m_ref + " differ in count");
        for (std::size_t t = 0; t < est.size(); ++t) v.push_back(epe(est[t], ref[t]));
      }
      report = MetricReport::from_values("epe", v, {{"wrap", true}, {"reference", m_zero ? "zero" : m_ref}});
    } else {
      const auto frames = load_images(m_a);
      std::vector<double> v;
      for (const auto& f : frames) v.push_back(end_continuity(f));
      report = MetricReport::from_values("end_continuity", v, {{"columns", "0 vs W-1"}});
    }
    emit_json(report.to_json(), m_out);
  } else if (vis->parsed()) {
    write_png(flow_to_color(read_flo(vis_in), vis_max), vis_out);
  } else if (cur->parsed()) {
    CurateOptions opts;
    if (!cur_work.empty()) opts.work_dir = cur_work;
    const auto records = curate(cur_corpus, C, opts);
    write_manifest(records, cur_out);
    std::size_t kept = 0;
    for (const auto& r : records) kept += !r.error && r.verdict == Verdict::Keep;
    std::cout << "records " << records.size() << " kept " << kept << "\n";
  }
  return kOk;
}

}  // namespace
}  // namespace erpm

int main(int argc, char** argv) {
  using namespace erpm;
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "erpm: " << e.what() << "\n";
    return kUsage;
  } catch (const EstimationError& e) {
    std::cerr << "erpm: " << e.what() << "\n";
    return kNumeric;
  } catch (const Error& e) {
    std::cerr << "erpm: " << e.what() << "\n";
    return kData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "erpm: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "erpm: " << e.what() << "\n";
    return kNumeric;
  }
}
