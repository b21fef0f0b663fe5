#include "stereoloc/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "stereoloc/parallel.hpp"

namespace stereoloc {

void validateParams(const MatcherParams& params) {
  if (params.block_size < 3 || params.block_size % 2 == 0)
    throw FieldOutOfRange("block_size must be odd and >= 3");
  if (params.min_disp < 0 || params.min_disp >= params.max_disp)
    throw FieldOutOfRange("need 0 <= min_disp < max_disp");
  if (!(params.p1 >= 0.0) || params.p1 > params.p2)
    throw FieldOutOfRange("need 0 <= p1 <= p2");
  if (params.num_paths != 4 && params.num_paths != 8)
    throw FieldOutOfRange("num_paths must be 4 or 8");
  if (params.lr_max_diff < 0.0)
    throw FieldOutOfRange("lr_max_diff must be >= 0");
  if (params.uniqueness_ratio < 0.0 || params.uniqueness_ratio >= 1.0)
    throw FieldOutOfRange("uniqueness_ratio must be in [0, 1)");
}

namespace {

void validateImagePair(const GrayImage& left, const GrayImage& right,
                       const MatcherParams& params) {
  if (!left.sameSize(right))
    throw ImageSizeMismatch(std::to_string(left.width()) + "x" +
                            std::to_string(left.height()) + " vs " +
                            std::to_string(right.width()) + "x" +
                            std::to_string(right.height()));
  if (left.empty()) throw ImageSizeMismatch("empty image");
  if (params.max_disp >= left.width() - params.block_size)
    throw SearchRangeTooWide("max_disp " + std::to_string(params.max_disp) +
                             " vs width " + std::to_string(left.width()) +
                             ", block " + std::to_string(params.block_size));
  for (const GrayImage* img : {&left, &right}) {
    if (!img->array().isFinite().all() || (img->array() < 0.0f).any())
      throw FieldOutOfRange("image intensities must be finite and >= 0");
  }
}

}  // namespace

CostVolume<float> buildCostVolume(const GrayImage& left, const GrayImage& right,
                                  const MatcherParams& params,
                                  int num_threads) {
  validateParams(params);
  validateImagePair(left, right, params);

  const int w = left.width();
  const int h = left.height();
  const int r = params.block_size / 2;
  const int levels = params.max_disp - params.min_disp + 1;
  const double inv_count =
      1.0 / (static_cast<double>(params.block_size) * params.block_size);

  CostVolume<float> vol(w, h, params.min_disp, levels);

  // One disparity plane per task: squared-difference plane on a border-
  // clamped domain, then a separable running-sum box filter. Sums stay
  // integer-exact for integer-valued intensities, so the result matches a
  // direct per-window evaluation.
  parallelFor(0, levels, num_threads, [&](int k) {
    const int d = params.min_disp + k;
    const int pw = w + 2 * r;
    const int ph = h + 2 * r;
    std::vector<double> plane(static_cast<std::size_t>(pw) * ph);
    for (int v = 0; v < ph; ++v) {
      const int yy = std::clamp(v - r, 0, h - 1);
      double* row = plane.data() + static_cast<std::size_t>(v) * pw;
      for (int u = 0; u < pw; ++u) {
        const int lx = std::clamp(u - r, 0, w - 1);
        const int rx = std::clamp(u - r - d, 0, w - 1);
        const double diff = static_cast<double>(left(lx, yy)) -
                            static_cast<double>(right(rx, yy));
        row[u] = diff * diff;
      }
    }

    // Horizontal pass: windowed row sums, output width w, padded height.
    std::vector<double> hsum(static_cast<std::size_t>(w) * ph);
    for (int v = 0; v < ph; ++v) {
      const double* row = plane.data() + static_cast<std::size_t>(v) * pw;
      double* out = hsum.data() + static_cast<std::size_t>(v) * w;
      double s = 0.0;
      for (int u = 0; u < 2 * r + 1; ++u) s += row[u];
      out[0] = s;
      for (int x = 1; x < w; ++x) {
        s += row[x + 2 * r] - row[x - 1];
        out[x] = s;
      }
    }

    // Vertical pass: running column sums over the horizontal sums.
    std::vector<double> colsum(static_cast<std::size_t>(w), 0.0);
    for (int v = 0; v < 2 * r + 1; ++v)
      for (int x = 0; x < w; ++x)
        colsum[static_cast<std::size_t>(x)] += hsum[static_cast<std::size_t>(v) * w + x];
    for (int y = 0; y < h; ++y) {
      if (y > 0) {
        const double* add = hsum.data() + static_cast<std::size_t>(y + 2 * r) * w;
        const double* sub = hsum.data() + static_cast<std::size_t>(y - 1) * w;
        for (int x = 0; x < w; ++x) colsum[static_cast<std::size_t>(x)] += add[x] - sub[x];
      }
      for (int x = 0; x < w; ++x) {
        const bool in_image = (x - d) >= 0 && (x - d) < w;
        vol.at(x, y, k) = in_image
                              ? static_cast<float>(colsum[static_cast<std::size_t>(x)] * inv_count)
                              : CostVolume<float>::kSentinel;
      }
    }
  });

  return vol;
}

CostVolume<float> rightReferencedVolume(const CostVolume<float>& left_volume,
                                        int num_threads) {
  const int w = left_volume.width;
  CostVolume<float> out(w, left_volume.height, left_volume.min_disp,
                        left_volume.disp_levels);
  parallelFor(0, left_volume.height, num_threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < out.disp_levels; ++k) {
        const int xl = x + left_volume.min_disp + k;
        out.at(x, y, k) = xl < w ? left_volume.at(xl, y, k)
                                 : CostVolume<float>::kSentinel;
      }
    }
  });
  return out;
}

namespace {

struct PathDir {
  int dx;
  int dy;
};

constexpr PathDir kPathDirs[8] = {{1, 0}, {-1, 0}, {0, 1},  {0, -1},
                                  {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};

// Start pixels of every maximal scanline for one direction: the pixels whose
// predecessor p - dir lies outside the image.
std::vector<std::pair<int, int>> scanlineStarts(int w, int h, PathDir dir) {
  std::vector<std::pair<int, int>> starts;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int px = x - dir.dx;
      const int py = y - dir.dy;
      if (px < 0 || px >= w || py < 0 || py >= h) starts.emplace_back(x, y);
    }
  return starts;
}

template <typename Scalar>
void aggregateOneScanline(const CostVolume<Scalar>& vol, PathDir dir, int x0,
                          int y0, double p1, double p2,
                          CostVolume<double>& out, std::vector<double>& prev,
                          std::vector<double>& cur) {
  const int levels = vol.disp_levels;
  double prev_min = 0.0;
  bool first = true;
  for (int x = x0, y = y0; x >= 0 && x < vol.width && y >= 0 && y < vol.height;
       x += dir.dx, y += dir.dy) {
    const Eigen::Index base = vol.index(x, y, 0);
    const Scalar* c = vol.costs.data() + base;
    double* acc = out.costs.data() + base;
    double cur_min = std::numeric_limits<double>::infinity();
    if (first) {
      for (int k = 0; k < levels; ++k) {
        const double l = static_cast<double>(c[k]);
        cur[static_cast<std::size_t>(k)] = l;
        acc[k] += l;
        cur_min = std::min(cur_min, l);
      }
      first = false;
    } else {
      const double step_cap = prev_min + p2;
      for (int k = 0; k < levels; ++k) {
        double best = prev[static_cast<std::size_t>(k)];
        if (k > 0) best = std::min(best, prev[static_cast<std::size_t>(k - 1)] + p1);
        if (k + 1 < levels) best = std::min(best, prev[static_cast<std::size_t>(k + 1)] + p1);
        best = std::min(best, step_cap);
        const double l = static_cast<double>(c[k]) + best - prev_min;
        cur[static_cast<std::size_t>(k)] = l;
        acc[k] += l;
        cur_min = std::min(cur_min, l);
      }
    }
    prev.swap(cur);
    prev_min = cur_min;
  }
}

}  // namespace

template <typename Scalar>
CostVolume<double> aggregateCosts(const CostVolume<Scalar>& volume,
                                  const MatcherParams& params,
                                  int num_threads) {
  validateParams(params);
  if (volume.width <= 0 || volume.height <= 0 || volume.disp_levels <= 0)
    throw DimensionMismatch("empty cost volume");

  CostVolume<double> out(volume.width, volume.height, volume.min_disp,
                         volume.disp_levels);

  // Directions run sequentially; the scanlines of one direction partition
  // the image, so per-cell accumulation order never depends on threading.
  for (int p = 0; p < params.num_paths; ++p) {
    const PathDir dir = kPathDirs[p];
    const auto starts = scanlineStarts(volume.width, volume.height, dir);
    parallelFor(0, static_cast<int>(starts.size()), num_threads, [&](int s) {
      std::vector<double> prev(static_cast<std::size_t>(volume.disp_levels));
      std::vector<double> cur(static_cast<std::size_t>(volume.disp_levels));
      const auto [x0, y0] = starts[static_cast<std::size_t>(s)];
      aggregateOneScanline(volume, dir, x0, y0, params.p1, params.p2, out,
                           prev, cur);
    });
  }
  return out;
}

template <typename Scalar>
DisparityMap selectDisparity(const CostVolume<Scalar>& aggregated,
                             const MatcherParams& params) {
  validateParams(params);
  DisparityMap disp(aggregated.width, aggregated.height,
                    invalidValue<float>());
  const int levels = aggregated.disp_levels;
  for (int y = 0; y < aggregated.height; ++y) {
    for (int x = 0; x < aggregated.width; ++x) {
      const Scalar* c = aggregated.costs.data() + aggregated.index(x, y, 0);
      int best_k = 0;
      for (int k = 1; k < levels; ++k)
        if (c[k] < c[best_k]) best_k = k;  // ties keep the smaller disparity

      if (params.uniqueness_ratio > 0.0) {
        const double limit =
            static_cast<double>(c[best_k]) * (1.0 + params.uniqueness_ratio);
        bool ambiguous = false;
        for (int k = 0; k < levels; ++k) {
          if (std::abs(k - best_k) <= 1) continue;
          if (static_cast<double>(c[k]) <= limit) {
            ambiguous = true;
            break;
          }
        }
        if (ambiguous) continue;
      }

      double value = static_cast<double>(aggregated.min_disp + best_k);
      if (params.subpixel && best_k > 0 && best_k + 1 < levels) {
        const double cm = static_cast<double>(c[best_k - 1]);
        const double c0 = static_cast<double>(c[best_k]);
        const double cp = static_cast<double>(c[best_k + 1]);
        const double denom = 2.0 * (cm + cp - 2.0 * c0);
        if (denom > 0.0)
          value += std::clamp((cm - cp) / denom, -0.5, 0.5);
      }
      disp(x, y) = static_cast<float>(value);
    }
  }
  return disp;
}

DisparityMap computeDisparity(const GrayImage& left, const GrayImage& right,
                              const MatcherParams& params, int num_threads) {
  const CostVolume<float> vol_l =
      buildCostVolume(left, right, params, num_threads);
  const CostVolume<double> agg_l = aggregateCosts(vol_l, params, num_threads);
  DisparityMap disp_l = selectDisparity(agg_l, params);
  if (!params.lrCheckEnabled()) return disp_l;

  const CostVolume<float> vol_r = rightReferencedVolume(vol_l, num_threads);
  const CostVolume<double> agg_r = aggregateCosts(vol_r, params, num_threads);
  const DisparityMap disp_r = selectDisparity(agg_r, params);

  for (int y = 0; y < disp_l.height(); ++y) {
    for (int x = 0; x < disp_l.width(); ++x) {
      const float dl = disp_l(x, y);
      if (!isValid(dl)) continue;
      const int xr = x - static_cast<int>(std::lround(dl));
      if (xr < 0 || xr >= disp_l.width()) {
        disp_l(x, y) = invalidValue<float>();
        continue;
      }
      const float dr = disp_r(xr, y);
      if (!isValid(dr) || std::abs(static_cast<double>(dl) - dr) > params.lr_max_diff)
        disp_l(x, y) = invalidValue<float>();
    }
  }
  return disp_l;
}

template CostVolume<double> aggregateCosts<float>(const CostVolume<float>&,
                                                  const MatcherParams&, int);
template CostVolume<double> aggregateCosts<double>(const CostVolume<double>&,
                                                   const MatcherParams&, int);
template DisparityMap selectDisparity<float>(const CostVolume<float>&,
                                             const MatcherParams&);
template DisparityMap selectDisparity<double>(const CostVolume<double>&,
                                              const MatcherParams&);

}  // namespace stereoloc
