#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "erpmotion/raster.hpp"

namespace erpm {

// 10 log10(1 / MSE) for intensities in [0, 1]; +inf when the images match.
double psnr(const ErpImage& a, const ErpImage& b);

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

// Single-scale SSIM on luma (three channels are converted with
// 0.299 / 0.587 / 0.114), Gaussian window, averaged over the valid region.
double ssim(const ErpImage& a, const ErpImage& b, const SsimParams& params = {});

// Mean over frames of the MSE between column 0 and column W - 1, squared
// error averaged over all rows and channels jointly.
double end_continuity(const std::vector<ErpImage>& frames);
double end_continuity(const ErpImage& frame);

struct MetricReport {
  std::string name;
  std::vector<double> per_frame;
  double mean = 0.0;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();

  // Builds the report; mean is the arithmetic mean of per_frame (+inf if any
  // entry is +inf).
  static MetricReport from_values(std::string name, std::vector<double> values, nlohmann::ordered_json params = {});

  // Non-finite values serialize as the strings "inf" / "-inf" / "nan".
  nlohmann::ordered_json to_json() const;
};

}  // namespace erpm
