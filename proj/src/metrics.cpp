#include "erpmotion/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "erpmotion/error.hpp"

namespace erpm {

double psnr(const ErpImage& a, const ErpImage& b) {
  if (!a.same_shape(b)) throw ShapeError("psnr: images differ in shape");
  double sum = 0.0;
  const auto va = a.values();
  const auto vb = b.values();
  for (std::size_t k = 0; k < va.size(); ++k) {
    const double d = static_cast<double>(va[k]) - vb[k];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(va.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

struct Map {
  int h = 0;
  int w = 0;
  std::vector<double> v;
  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * w + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * w + j]; }
};

Map luma(const ErpImage& img) {
  Map m{img.height(), img.width(), std::vector<double>(img.pixel_count())};
  for (int i = 0; i < img.height(); ++i) {
    for (int j = 0; j < img.width(); ++j) {
      const auto p = img.pixel(i, j);
      m.at(i, j) = img.channels() == 3 ? 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2] : static_cast<double>(p[0]);
    }
  }
  return m;
}

// Valid-mode separable filtering.
Map filter_valid(const Map& in, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  Map tmp{in.h, in.w - n + 1, {}};
  tmp.v.assign(static_cast<std::size_t>(tmp.h) * tmp.w, 0.0);
  for (int i = 0; i < tmp.h; ++i) {
    for (int j = 0; j < tmp.w; ++j) {
      double s = 0.0;
      for (int t = 0; t < n; ++t) s += k[t] * in.at(i, j + t);
      tmp.at(i, j) = s;
    }
  }
  Map out{in.h - n + 1, tmp.w, {}};
  out.v.assign(static_cast<std::size_t>(out.h) * out.w, 0.0);
  for (int i = 0; i < out.h; ++i) {
    for (int j = 0; j < out.w; ++j) {
      double s = 0.0;
      for (int t = 0; t < n; ++t) s += k[t] * tmp.at(i + t, j);
      out.at(i, j) = s;
    }
  }
  return out;
}

Map product(const Map& a, const Map& b) {
  Map out{a.h, a.w, std::vector<double>(a.v.size())};
  for (std::size_t k = 0; k < a.v.size(); ++k) out.v[k] = a.v[k] * b.v[k];
  return out;
}

}  // namespace

double ssim(const ErpImage& a, const ErpImage& b, const SsimParams& params) {
  if (!a.same_shape(b)) throw ShapeError("ssim: images differ in shape");
  if (params.window <= 0 || !(params.sigma > 0.0)) throw ConfigError("ssim: invalid window");
  if (a.height() < params.window || a.width() < params.window) throw ShapeError("ssim: image smaller than the window");

  std::vector<double> kernel(params.window);
  const double c = (params.window - 1) / 2.0;
  for (int t = 0; t < params.window; ++t) kernel[t] = std::exp(-(t - c) * (t - c) / (2.0 * params.sigma * params.sigma));
  const double norm = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& k : kernel) k /= norm;

  const Map x = luma(a);
  const Map y = luma(b);
  const Map mx = filter_valid(x, kernel);
  const Map my = filter_valid(y, kernel);
  const Map sxx = filter_valid(product(x, x), kernel);
  const Map syy = filter_valid(product(y, y), kernel);
  const Map sxy = filter_valid(product(x, y), kernel);

  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);
  double total = 0.0;
  for (std::size_t k = 0; k < mx.v.size(); ++k) {
    const double ux = mx.v[k];
    const double uy = my.v[k];
    const double vx = sxx.v[k] - ux * ux;
    const double vy = syy.v[k] - uy * uy;
    const double cxy = sxy.v[k] - ux * uy;
    total += ((2 * ux * uy + c1) * (2 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.v.size());
}

double end_continuity(const ErpImage& frame) {
  const int w = frame.width();
  double sum = 0.0;
  for (int i = 0; i < frame.height(); ++i) {
    for (int c = 0; c < frame.channels(); ++c) {
      const double d = static_cast<double>(frame.at(i, 0, c)) - frame.at(i, w - 1, c);
      sum += d * d;
    }
  }
  return sum / (static_cast<double>(frame.height()) * frame.channels());
}

double end_continuity(const std::vector<ErpImage>& frames) {
  if (frames.empty()) throw ShapeError("end_continuity: needs at least one frame");
  double sum = 0.0;
  for (const auto& f : frames) sum += end_continuity(f);
  return sum / static_cast<double>(frames.size());
}

MetricReport MetricReport::from_values(std::string name, std::vector<double> values, nlohmann::ordered_json params) {
  MetricReport r;
  r.name = std::move(name);
  r.per_frame = std::move(values);
  r.params = params.is_null() ? nlohmann::ordered_json::object() : std::move(params);
  double sum = 0.0;
  for (double v : r.per_frame) sum += v;
  r.mean = r.per_frame.empty() ? 0.0 : sum / static_cast<double>(r.per_frame.size());
  return r;
}

namespace {

nlohmann::ordered_json number_or_tag(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

nlohmann::ordered_json MetricReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["params"] = params;
  auto& arr = j["per_frame"] = nlohmann::ordered_json::array();
  for (double v : per_frame) arr.push_back(number_or_tag(v));
  j["mean"] = number_or_tag(mean);
  return j;
}

}  // namespace erpm
