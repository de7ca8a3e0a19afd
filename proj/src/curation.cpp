#include "erpmotion/curation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "erpmotion/decouple.hpp"
#include "erpmotion/error.hpp"
#include "erpmotion/flow.hpp"
#include "erpmotion/image_io.hpp"
#include "erpmotion/metrics.hpp"
#include "erpmotion/parallel.hpp"
#include "erpmotion/rng.hpp"

namespace erpm {

void CurationConfig::validate() const {
  const bool positive = stereo_threshold > 0 && fisheye_threshold > 0 && black_level > 0 && motion_threshold > 0 &&
                        min_clip_s > 0 && max_clip_s > 0 && transition_trim_s > 0 && resize_min_dim > 0 &&
                        frames_sampled_per_check > 0 && transition_threshold > 0 && transition_min_dim > 0 &&
                        max_clips_per_video > 0 && min_rotation_deg_per_s >= 0;
  if (!positive) throw ConfigError("curation: thresholds must be positive");
  if (!(min_clip_s < max_clip_s)) throw ConfigError("curation: min_clip_s must be below max_clip_s");
}

nlohmann::ordered_json CurationConfig::to_json() const {
  nlohmann::ordered_json j;
  j["stereo_threshold"] = stereo_threshold;
  j["fisheye_threshold"] = fisheye_threshold;
  j["black_level"] = black_level;
  j["motion_threshold"] = motion_threshold;
  j["min_clip_s"] = min_clip_s;
  j["max_clip_s"] = max_clip_s;
  j["transition_trim_s"] = transition_trim_s;
  j["resize_min_dim"] = resize_min_dim;
  j["frames_sampled_per_check"] = frames_sampled_per_check;
  j["transition_threshold"] = transition_threshold;
  j["transition_min_dim"] = transition_min_dim;
  j["max_clips_per_video"] = max_clips_per_video;
  j["min_rotation_deg_per_s"] = min_rotation_deg_per_s;
  j["seed"] = seed;
  j["flow"] = {{"levels", flow.levels}, {"radius", flow.radius}, {"block", flow.block}};
  return j;
}

namespace {

const std::map<Reason, std::string>& reason_names() {
  static const std::map<Reason, std::string> names{
      {Reason::NonErpStereo, "non-erp-stereo"}, {Reason::NonErpFisheye, "non-erp-fisheye"},
      {Reason::LowMotion, "low-motion"},        {Reason::TooShort, "too-short"},
      {Reason::TooLong, "too-long"},            {Reason::ClipCap, "clip-cap"},
      {Reason::LowRotation, "low-rotation"},    {Reason::Ok, "ok"}};
  return names;
}

}  // namespace

std::string to_string(Verdict v) { return v == Verdict::Keep ? "keep" : "discard"; }

std::string to_string(Reason r) { return reason_names().at(r); }

Verdict verdict_from_string(const std::string& s) {
  if (s == "keep") return Verdict::Keep;
  if (s == "discard") return Verdict::Discard;
  throw FormatError("unknown verdict '" + s + "'");
}

Reason reason_from_string(const std::string& s) {
  for (const auto& [r, name] : reason_names()) {
    if (name == s) return r;
  }
  throw FormatError("unknown reason '" + s + "'");
}

FrameSource frames_in_memory(const std::vector<ErpImage>& frames) {
  return {frames.size(), [&frames](std::size_t t) { return frames.at(t); }};
}

std::vector<std::size_t> sample_indices(std::size_t count, int samples) {
  std::vector<std::size_t> out;
  if (count == 0 || samples <= 0) return out;
  if (samples == 1 || count == 1) return {0};
  for (int k = 0; k < samples; ++k) {
    const std::size_t idx =
        static_cast<std::size_t>(std::llround(static_cast<double>(k) * (count - 1) / (samples - 1)));
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

double stereo3d_score(const std::vector<ErpImage>& frames) {
  if (frames.empty()) throw ShapeError("stereo3d_score: needs at least one frame");
  double sum = 0.0;
  for (const auto& f : frames) {
    if (f.width() % 2 != 0) throw ShapeError("stereo3d_score: frame width must be even");
    const int half = f.width() / 2;
    ErpImage left(f.height(), half, f.channels());
    ErpImage right(f.height(), half, f.channels());
    for (int i = 0; i < f.height(); ++i) {
      for (int j = 0; j < half; ++j) {
        for (int c = 0; c < f.channels(); ++c) {
          left.at(i, j, c) = f.at(i, j, c);
          right.at(i, j, c) = f.at(i, j + half, c);
        }
      }
    }
    sum += std::clamp(ssim(left, right), 0.0, 1.0);
  }
  return sum / static_cast<double>(frames.size());
}

double fisheye_score(const std::vector<ErpImage>& frames, double black_level) {
  if (frames.empty()) throw ShapeError("fisheye_score: needs at least one frame");
  double sum = 0.0;
  for (const auto& f : frames) {
    const ErpImage g = to_gray(f);
    const double ci = f.height() / 2.0;
    const double cj = f.width() / 2.0;
    const double r = std::min(f.height(), f.width()) / 2.0;
    std::size_t masked = 0;
    std::size_t black = 0;
    for (int i = 0; i < f.height(); ++i) {
      for (int j = 0; j < f.width(); ++j) {
        const double di = i + 0.5 - ci;
        const double dj = j + 0.5 - cj;
        if (di * di + dj * dj <= r * r) continue;
        ++masked;
        if (g.at(i, j) < black_level) ++black;
      }
    }
    sum += masked ? static_cast<double>(black) / static_cast<double>(masked) : 0.0;
  }
  return sum / static_cast<double>(frames.size());
}

std::vector<int> detect_transitions(const FrameSource& frames, const CurationConfig& config) {
  std::vector<int> out;
  if (frames.count < 2) return out;
  ErpImage prev = resize_min_dim(to_gray(frames.get(0)), config.transition_min_dim);
  bool in_run = false;
  for (std::size_t t = 1; t < frames.count; ++t) {
    ErpImage cur = resize_min_dim(to_gray(frames.get(t)), config.transition_min_dim);
    if (!cur.same_shape(prev)) throw ShapeError("detect_transitions: frame " + std::to_string(t) + " changes size");
    double sum = 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) sum += std::abs(static_cast<double>(cur.values()[k]) - prev.values()[k]);
    const bool flagged = sum / static_cast<double>(cur.size()) > config.transition_threshold;
    if (flagged && !in_run) out.push_back(static_cast<int>(t));
    in_run = flagged;
    prev = std::move(cur);
  }
  return out;
}

std::vector<int> detect_transitions(const std::vector<ErpImage>& frames, const CurationConfig& config) {
  return detect_transitions(frames_in_memory(frames), config);
}

namespace {

struct MotionStats {
  double motion = 0.0;
  std::optional<double> rotation_deg_per_frame;
};

MotionStats motion_stats(const FrameSource& frames, std::size_t begin, std::size_t end, const CurationConfig& config,
                         bool want_rotation) {
  MotionStats s;
  if (end <= begin + 1) return s;
  ErpImage prev = resize_min_dim(frames.get(begin), config.resize_min_dim);
  double sum = 0.0;
  double rot = 0.0;
  bool rotation_ok = want_rotation && prev.is_erp_aspect();
  for (std::size_t t = begin + 1; t < end; ++t) {
    ErpImage cur = resize_min_dim(frames.get(t), config.resize_min_dim);
    const FlowField f = estimate_flow(prev, cur, config.flow);
    sum += mean_magnitude(f);
    if (rotation_ok) rot += estimate_rotation(f).angle_deg();
    prev = std::move(cur);
  }
  const double pairs = static_cast<double>(end - begin - 1);
  s.motion = sum / pairs;
  if (rotation_ok) s.rotation_deg_per_frame = rot / pairs;
  return s;
}

}  // namespace

double motion_score(const FrameSource& frames, std::size_t begin, std::size_t end, const CurationConfig& config) {
  return motion_stats(frames, begin, end, config, false).motion;
}

double motion_score(const std::vector<ErpImage>& frames, const CurationConfig& config) {
  if (frames.size() < 2) throw ShapeError("motion_score: needs at least two frames");
  return motion_score(frames_in_memory(frames), 0, frames.size(), config);
}

Segmentation segment_clips_detailed(int frame_count, double fps, const std::vector<int>& transitions,
                                    const CurationConfig& config) {
  if (!(fps > 0.0)) throw DomainError("segment_clips: fps must be positive");
  Segmentation seg;
  if (frame_count <= 0) return seg;
  const int trim = static_cast<int>(std::lround(config.transition_trim_s * fps));
  const int min_len = static_cast<int>(std::ceil(config.min_clip_s * fps - 1e-9));
  const int max_len = std::max(1, static_cast<int>(std::floor(config.max_clip_s * fps + 1e-9)));

  std::vector<bool> removed(frame_count, false);
  for (int t : transitions) {
    for (int k = std::max(0, t - trim); k <= std::min(frame_count - 1, t + trim); ++k) removed[k] = true;
  }
  int k = 0;
  while (k < frame_count) {
    if (removed[k]) {
      ++k;
      continue;
    }
    int end = k;
    while (end < frame_count && !removed[end]) ++end;
    for (int start = k; start < end;) {
      const int stop = std::min(start + max_len, end);
      (stop - start >= min_len ? seg.clips : seg.dropped).push_back({start, stop});
      start = stop;
    }
    k = end;
  }
  return seg;
}

std::vector<Span> segment_clips(int frame_count, double fps, const std::vector<int>& transitions,
                                const CurationConfig& config) {
  return segment_clips_detailed(frame_count, fps, transitions, config).clips;
}

namespace {

struct VideoInput {
  std::filesystem::path dir;
  std::string id;
  double fps = 0.0;
  std::vector<std::filesystem::path> frames;
};

VideoInput load_video_meta(const std::filesystem::path& dir) {
  VideoInput v;
  v.dir = dir;
  v.id = dir.filename().string();
  const auto meta = dir / "meta.json";
  std::ifstream is(meta);
  if (!is) throw FormatError(meta.string() + ": missing sidecar");
  try {
    const auto j = nlohmann::json::parse(is);
    v.fps = j.at("fps").get<double>();
    v.id = j.value("id", v.id);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(meta.string() + ": " + e.what());
  }
  if (!(v.fps > 0.0)) throw FormatError(meta.string() + ": fps must be positive");
  v.frames = list_frames(dir);
  if (v.frames.empty()) throw FormatError(dir.string() + ": no frames");
  return v;
}

std::vector<ClipRecord> curate_video(const VideoInput& v, const CurationConfig& config) {
  FrameSource src{v.frames.size(), [&v](std::size_t t) { return read_frame(v.frames.at(t)); }};
  const int n = static_cast<int>(v.frames.size());

  std::vector<ErpImage> sampled;
  for (std::size_t idx : sample_indices(src.count, config.frames_sampled_per_check)) sampled.push_back(src.get(idx));
  ClipScores video_scores;
  video_scores.stereo3d = stereo3d_score(sampled);
  video_scores.fisheye = fisheye_score(sampled, config.black_level);

  auto record = [&](Span s, ClipScores scores, Verdict verdict, Reason reason) {
    ClipRecord r;
    r.source_id = v.id;
    r.start_frame = s.start;
    r.end_frame = s.end;
    r.fps = v.fps;
    r.scores = scores;
    r.verdict = verdict;
    r.reason = reason;
    return r;
  };

  if (video_scores.stereo3d > config.stereo_threshold) {
    return {record({0, n}, video_scores, Verdict::Discard, Reason::NonErpStereo)};
  }
  if (video_scores.fisheye > config.fisheye_threshold) {
    return {record({0, n}, video_scores, Verdict::Discard, Reason::NonErpFisheye)};
  }

  const std::vector<int> transitions = detect_transitions(src, config);
  video_scores.transitions = static_cast<int>(transitions.size());
  const Segmentation seg = segment_clips_detailed(n, v.fps, transitions, config);

  std::vector<ClipRecord> out;
  for (const Span& s : seg.dropped) out.push_back(record(s, video_scores, Verdict::Discard, Reason::TooShort));

  const bool want_rotation = config.min_rotation_deg_per_s > 0.0;
  std::vector<std::size_t> kept;
  for (const Span& s : seg.clips) {
    ClipScores scores = video_scores;
    const MotionStats m = motion_stats(src, s.start, s.end, config, want_rotation);
    scores.motion = m.motion;
    if (m.rotation_deg_per_frame) scores.rotation_deg_per_s = *m.rotation_deg_per_frame * v.fps;
    const double duration = (s.end - s.start) / v.fps;
    Reason reason = Reason::Ok;
    if (duration < config.min_clip_s - 1e-9) {
      reason = Reason::TooShort;
    } else if (duration > config.max_clip_s + 1e-9) {
      reason = Reason::TooLong;
    } else if (scores.motion < config.motion_threshold) {
      reason = Reason::LowMotion;
    } else if (scores.rotation_deg_per_s && *scores.rotation_deg_per_s < config.min_rotation_deg_per_s) {
      reason = Reason::LowRotation;
    }
    out.push_back(record(s, scores, reason == Reason::Ok ? Verdict::Keep : Verdict::Discard, reason));
    if (reason == Reason::Ok) kept.push_back(out.size() - 1);
  }

  if (static_cast<int>(kept.size()) > config.max_clips_per_video) {
    // Deterministic random subset keyed by (seed, source id).
    const CounterRng rng(derive_seed(config.seed, "clip-cap:" + v.id));
    std::vector<std::pair<std::uint64_t, std::size_t>> order;
    for (std::size_t k = 0; k < kept.size(); ++k) order.emplace_back(rng.bits(k), kept[k]);
    std::sort(order.begin(), order.end());
    for (std::size_t k = static_cast<std::size_t>(config.max_clips_per_video); k < order.size(); ++k) {
      out[order[k].second].verdict = Verdict::Discard;
      out[order[k].second].reason = Reason::ClipCap;
    }
  }
  std::sort(out.begin(), out.end(), [](const ClipRecord& a, const ClipRecord& b) { return a.start_frame < b.start_frame; });
  return out;
}

std::string safe_name(const std::string& id) {
  std::string s = id;
  for (char& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return s;
}

}  // namespace

std::vector<ClipRecord> curate(const std::filesystem::path& corpus, const CurationConfig& config,
                               const CurateOptions& options) {
  config.validate();
  if (!std::filesystem::is_directory(corpus)) throw FormatError(corpus.string() + ": corpus is not a directory");
  std::vector<std::filesystem::path> dirs;
  for (const auto& e : std::filesystem::directory_iterator(corpus)) {
    if (e.is_directory()) dirs.push_back(e.path());
  }
  std::sort(dirs.begin(), dirs.end());

  const std::string fingerprint = config.to_json().dump();
  if (options.work_dir) std::filesystem::create_directories(*options.work_dir);

  std::vector<std::vector<ClipRecord>> per_video(dirs.size());
  std::vector<std::string> sort_keys(dirs.size());
  parallel_for(dirs.size(), [&](std::size_t k) {
    sort_keys[k] = dirs[k].filename().string();
    std::optional<std::filesystem::path> fragment;
    std::optional<std::filesystem::path> marker;
    if (options.work_dir) {
      fragment = *options.work_dir / (safe_name(dirs[k].filename().string()) + ".jsonl");
      marker = *options.work_dir / (safe_name(dirs[k].filename().string()) + ".done");
      std::ifstream m(*marker);
      std::string stored((std::istreambuf_iterator<char>(m)), std::istreambuf_iterator<char>());
      if (m && stored == fingerprint && std::filesystem::exists(*fragment)) {
        per_video[k] = read_manifest(*fragment);
        if (!per_video[k].empty()) sort_keys[k] = per_video[k].front().source_id;
        return;
      }
    }
    try {
      const VideoInput v = load_video_meta(dirs[k]);
      sort_keys[k] = v.id;
      per_video[k] = curate_video(v, config);
    } catch (const std::exception& e) {
      ClipRecord r;
      r.source_id = sort_keys[k];
      r.error = e.what();
      per_video[k] = {r};
    }
    if (fragment) {
      write_manifest(per_video[k], *fragment);
      std::ofstream m(*marker);
      m << fingerprint;
    }
  });

  std::vector<std::size_t> order(dirs.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sort_keys[a] < sort_keys[b]; });
  std::vector<ClipRecord> out;
  for (std::size_t k : order) out.insert(out.end(), per_video[k].begin(), per_video[k].end());
  return out;
}

nlohmann::ordered_json to_json(const ClipRecord& r) {
  nlohmann::ordered_json j;
  j["source_id"] = r.source_id;
  if (r.error) {
    j["error"] = *r.error;
    return j;
  }
  j["start_frame"] = r.start_frame;
  j["end_frame"] = r.end_frame;
  j["fps"] = r.fps;
  nlohmann::ordered_json s;
  s["stereo3d"] = r.scores.stereo3d;
  s["fisheye"] = r.scores.fisheye;
  s["motion"] = r.scores.motion;
  s["transitions"] = r.scores.transitions;
  if (r.scores.rotation_deg_per_s) s["rotation_deg_per_s"] = *r.scores.rotation_deg_per_s;
  j["scores"] = s;
  j["verdict"] = to_string(r.verdict);
  j["reason"] = to_string(r.reason);
  return j;
}

ClipRecord record_from_json(const nlohmann::json& j) {
  try {
    ClipRecord r;
    r.source_id = j.at("source_id").get<std::string>();
    if (j.contains("error")) {
      r.error = j.at("error").get<std::string>();
      return r;
    }
    r.start_frame = j.at("start_frame").get<int>();
    r.end_frame = j.at("end_frame").get<int>();
    r.fps = j.at("fps").get<double>();
    const auto& s = j.at("scores");
    r.scores.stereo3d = s.at("stereo3d").get<double>();
    r.scores.fisheye = s.at("fisheye").get<double>();
    r.scores.motion = s.at("motion").get<double>();
    r.scores.transitions = s.at("transitions").get<int>();
    if (s.contains("rotation_deg_per_s")) r.scores.rotation_deg_per_s = s.at("rotation_deg_per_s").get<double>();
    r.verdict = verdict_from_string(j.at("verdict").get<std::string>());
    r.reason = reason_from_string(j.at("reason").get<std::string>());
    if (!(r.start_frame < r.end_frame)) throw FormatError("manifest: record has start >= end");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest: ") + e.what());
  }
}

std::string manifest_string(const std::vector<ClipRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

void write_manifest(const std::vector<ClipRecord>& records, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError(path.string() + ": cannot open for writing");
  os << manifest_string(records);
  if (!os) throw FormatError(path.string() + ": write failed");
}

std::vector<ClipRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw FormatError(path.string() + ": cannot open");
  std::vector<ClipRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace erpm
