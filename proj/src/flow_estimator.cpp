#include "erpmotion/flow_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "erpmotion/erp_ops.hpp"
#include "erpmotion/error.hpp"
#include "erpmotion/parallel.hpp"

namespace erpm {

namespace {

struct Plane {
  int h = 0;
  int w = 0;
  std::vector<double> v;
  double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * w + j]; }
};

Plane gray_plane(const ErpImage& img) {
  const ErpImage g = to_gray(img);
  Plane p{g.height(), g.width(), {}};
  p.v.assign(g.values().begin(), g.values().end());
  return p;
}

Plane downsample(const Plane& in) {
  Plane out{in.h / 2, in.w / 2, {}};
  out.v.resize(static_cast<std::size_t>(out.h) * out.w);
  for (int i = 0; i < out.h; ++i) {
    for (int j = 0; j < out.w; ++j) {
      out.v[static_cast<std::size_t>(i) * out.w + j] =
          0.25 * (in(2 * i, 2 * j) + in(2 * i, 2 * j + 1) + in(2 * i + 1, 2 * j) + in(2 * i + 1, 2 * j + 1));
    }
  }
  return out;
}

// Dense two-component field at one pyramid level.
struct LevelFlow {
  int h = 0;
  int w = 0;
  std::vector<double> du;
  std::vector<double> dv;
};

// Bilinear lookup in a dense level field, rows clamped, columns wrapped.
void sample_level(const LevelFlow& f, double y, double x, double& du, double& dv) {
  y = std::clamp(y, 0.0, f.h - 1.0);
  const int y0 = static_cast<int>(std::floor(y));
  const int y1 = std::min(y0 + 1, f.h - 1);
  const double fy = y - y0;
  const int xf = static_cast<int>(std::floor(x));
  const double fx = x - xf;
  const int x0 = wrap_index(xf, f.w);
  const int x1 = wrap_index(xf + 1, f.w);
  auto at = [&](const std::vector<double>& v, int i, int j) { return v[static_cast<std::size_t>(i) * f.w + j]; };
  auto lerp2 = [&](const std::vector<double>& v) {
    return (1 - fy) * ((1 - fx) * at(v, y0, x0) + fx * at(v, y0, x1)) + fy * ((1 - fx) * at(v, y1, x0) + fx * at(v, y1, x1));
  };
  du = lerp2(f.du);
  dv = lerp2(f.dv);
}

class BlockMatcher {
 public:
  BlockMatcher(const Plane& a, const Plane& b, int block, int radius) : a_(a), b_(b), block_(block), radius_(radius) {
    nby_ = (a.h + block - 1) / block;
    nbx_ = (a.w + block - 1) / block;
  }

  int rows() const { return nby_; }
  int cols() const { return nbx_; }

  double center_y(int by) const { return by * block_ + (std::min(block_, a_.h - by * block_) - 1) / 2.0; }
  double center_x(int bx) const { return bx * block_ + (std::min(block_, a_.w - bx * block_) - 1) / 2.0; }

  // Refines the guess (gdu, gdv) for block (by, bx).
  void match(int by, int bx, double gdu, double gdv, double& du, double& dv) const {
    const int base_x = static_cast<int>(std::lround(gdu));
    const int base_y = static_cast<int>(std::lround(gdv));
    double best = std::numeric_limits<double>::infinity();
    int best_r2 = 0;
    int ox = 0;
    int oy = 0;
    for (int dy = -radius_; dy <= radius_; ++dy) {
      for (int dx = -radius_; dx <= radius_; ++dx) {
        const double s = ssd(by, bx, base_x + dx, base_y + dy);
        const int r2 = dx * dx + dy * dy;
        const double tol = 1e-12 * (1.0 + s);
        if (!std::isfinite(best) || s < best - tol || (std::abs(s - best) <= tol && r2 < best_r2)) {
          best = s;
          best_r2 = r2;
          ox = dx;
          oy = dy;
        }
      }
    }
    const int ix = base_x + ox;
    const int iy = base_y + oy;
    du = ix;
    dv = iy;
    if (best == 0.0) return;  // exact match
    du += parabola(ssd(by, bx, ix - 1, iy), best, ssd(by, bx, ix + 1, iy));
    dv += parabola(ssd(by, bx, ix, iy - 1), best, ssd(by, bx, ix, iy + 1));
  }

 private:
  static double parabola(double sm, double s0, double sp) {
    const double denom = sm - 2.0 * s0 + sp;
    if (!(denom > 1e-15)) return 0.0;
    return std::clamp(0.5 * (sm - sp) / denom, -0.5, 0.5);
  }

  double ssd(int by, int bx, int dx, int dy) const {
    const int i0 = by * block_;
    const int j0 = bx * block_;
    const int i1 = std::min(a_.h, i0 + block_);
    const int j1 = std::min(a_.w, j0 + block_);
    double s = 0.0;
    for (int i = i0; i < i1; ++i) {
      int ti = i + dy;
      int shift = dx;
      if (ti < 0 || ti >= b_.h) {
        const PixelIndex f = fold_pixel(ti, 0, b_.h, b_.w);
        shift += f.j;
        ti = f.i;
      }
      const double* brow = b_.v.data() + static_cast<std::size_t>(ti) * b_.w;
      const double* arow = a_.v.data() + static_cast<std::size_t>(i) * a_.w;
      for (int j = j0; j < j1; ++j) {
        const double d = arow[j] - brow[wrap_index(j + shift, b_.w)];
        s += d * d;
      }
    }
    return s;
  }

  const Plane& a_;
  const Plane& b_;
  int block_;
  int radius_;
  int nby_ = 0;
  int nbx_ = 0;
};

// Interpolates block-center vectors to every pixel of the level.
LevelFlow densify(const BlockMatcher& m, const std::vector<double>& bdu, const std::vector<double>& bdv, int h, int w) {
  LevelFlow out{h, w, std::vector<double>(static_cast<std::size_t>(h) * w), std::vector<double>(static_cast<std::size_t>(h) * w)};
  const int nby = m.rows();
  const int nbx = m.cols();
  std::vector<double> cy(nby), cx(nbx);
  for (int by = 0; by < nby; ++by) cy[by] = m.center_y(by);
  for (int bx = 0; bx < nbx; ++bx) cx[bx] = m.center_x(bx);

  // Column interpolation support: (left block, right block, weight) per pixel column.
  struct ColTap {
    int left;
    int right;
    double t;
  };
  std::vector<ColTap> taps(w);
  for (int j = 0; j < w; ++j) {
    const auto it = std::upper_bound(cx.begin(), cx.end(), static_cast<double>(j));
    const int r = static_cast<int>(it - cx.begin());
    if (r == 0 || r == nbx) {
      // Between the last and the first center across the seam.
      const double left_pos = cx[nbx - 1];
      const double span = (cx[0] + w) - left_pos;
      const double pos = r == 0 ? j + w : static_cast<double>(j);
      taps[j] = {nbx - 1, 0, span > 0 ? (pos - left_pos) / span : 0.0};
    } else {
      taps[j] = {r - 1, r, (j - cx[r - 1]) / (cx[r] - cx[r - 1])};
    }
  }
  for (int i = 0; i < h; ++i) {
    int top = 0;
    int bot = 0;
    double ty = 0.0;
    if (i <= cy.front()) {
      top = bot = 0;
    } else if (i >= cy.back()) {
      top = bot = nby - 1;
    } else {
      bot = static_cast<int>(std::upper_bound(cy.begin(), cy.end(), static_cast<double>(i)) - cy.begin());
      top = bot - 1;
      ty = (i - cy[top]) / (cy[bot] - cy[top]);
    }
    for (int j = 0; j < w; ++j) {
      const ColTap& c = taps[j];
      auto lerp = [&](const std::vector<double>& v) {
        const double a = (1 - c.t) * v[top * nbx + c.left] + c.t * v[top * nbx + c.right];
        const double b = (1 - c.t) * v[bot * nbx + c.left] + c.t * v[bot * nbx + c.right];
        return (1 - ty) * a + ty * b;
      };
      const std::size_t k = static_cast<std::size_t>(i) * w + j;
      out.du[k] = lerp(bdu);
      out.dv[k] = lerp(bdv);
    }
  }
  return out;
}

}  // namespace

int default_pyramid_levels(int height, int width) {
  const double m = std::min(height, width);
  return std::max(1, static_cast<int>(std::ceil(std::log2(m / 16.0))));
}

FlowField estimate_flow(const ErpImage& a, const ErpImage& b, const BlockMatchParams& params) {
  if (!a.same_shape(b)) throw ShapeError("estimate_flow: frames differ in shape");
  if (params.block <= 0 || params.radius < 0 || params.levels < 0) throw ConfigError("estimate_flow: invalid parameters");
  int levels = params.levels > 0 ? params.levels : default_pyramid_levels(a.height(), a.width());

  std::vector<Plane> pa{gray_plane(a)};
  std::vector<Plane> pb{gray_plane(b)};
  while (static_cast<int>(pa.size()) < levels && pa.back().h / 2 >= 2 && pa.back().w / 2 >= 2) {
    pa.push_back(downsample(pa.back()));
    pb.push_back(downsample(pb.back()));
  }
  levels = static_cast<int>(pa.size());

  LevelFlow prev;
  for (int l = levels - 1; l >= 0; --l) {
    const Plane& la = pa[l];
    const Plane& lb = pb[l];
    BlockMatcher matcher(la, lb, params.block, params.radius);
    const int nby = matcher.rows();
    const int nbx = matcher.cols();
    std::vector<double> bdu(static_cast<std::size_t>(nby) * nbx, 0.0);
    std::vector<double> bdv(static_cast<std::size_t>(nby) * nbx, 0.0);
    const bool has_prev = !prev.du.empty();
    const double sy = has_prev ? static_cast<double>(la.h) / prev.h : 1.0;
    const double sx = has_prev ? static_cast<double>(la.w) / prev.w : 1.0;
    parallel_for(static_cast<std::size_t>(nby) * nbx, [&](std::size_t k) {
      const int by = static_cast<int>(k) / nbx;
      const int bx = static_cast<int>(k) % nbx;
      double gdu = 0.0;
      double gdv = 0.0;
      if (has_prev) {
        sample_level(prev, (matcher.center_y(by) + 0.5) / sy - 0.5, (matcher.center_x(bx) + 0.5) / sx - 0.5, gdu, gdv);
        gdu *= sx;
        gdv *= sy;
      }
      matcher.match(by, bx, gdu, gdv, bdu[k], bdv[k]);
    });
    prev = densify(matcher, bdu, bdv, la.h, la.w);
  }

  FlowField out(a.height(), a.width());
  for (std::size_t k = 0; k < out.pixel_count(); ++k) {
    out.du_values()[k] = static_cast<float>(prev.du[k]);
    out.dv_values()[k] = static_cast<float>(prev.dv[k]);
  }
  return out;
}

}  // namespace erpm
