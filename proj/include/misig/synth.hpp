#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "misig/bags.hpp"

namespace misig {

struct SyntheticConfig {
  int rows = 100;
  int cols = 100;
  Spectrum bg_mean;
  Eigen::MatrixXd bg_cov;
  Spectrum target;
  // Absent selects the regular grid from default_target_grid; an explicit
  // (possibly empty) list overrides it.
  std::optional<std::vector<PixelLocation>> target_locations;
  double proportion_lo = 0.25;
  double proportion_hi = 0.5;
  int n_pos_bags = 3;
  int pos_bag_size = 30;
  int n_neg_bags = 3;
  int neg_bag_size = 80;
  std::uint64_t seed = 0;
};

// The reference two-band setup: 100x100 scene, mean (5,5), unit variances
// with 0.5 covariance, target (10,3), proportions in [0.25, 0.5], three
// positive bags of 30 and three negative bags of 80.
SyntheticConfig default_synthetic_config();

// Rows and columns in {5, 15, 25, ...} below the extent.
std::vector<PixelLocation> default_target_grid(int rows, int cols);

struct Scene {
  int rows = 0;
  int cols = 0;
  // Column i holds the spectrum of pixel i in row-major scan order, so the
  // underlying column-major storage is band-interleaved-by-pixel.
  Eigen::MatrixXd pixels;

  Eigen::Index bands() const { return pixels.rows(); }
  Eigen::Index pixel_count() const { return pixels.cols(); }
  Eigen::Index index(int row, int col) const {
    return static_cast<Eigen::Index>(row) * cols + col;
  }
};

struct GroundTruth {
  int rows = 0;
  int cols = 0;
  Eigen::VectorXd abundance;  // row-major, target proportion per pixel
  Spectrum target;            // empty when unknown (e.g. loaded from disk)
};

// proportion * target + (1 - proportion) * background.
Spectrum mix_pixel(const Spectrum& background, const Spectrum& target,
                   double proportion);

// Gaussian background with target-mixed pixels at the configured locations,
// proportions uniform in [lo, hi].  Deterministic in cfg.seed.
std::pair<Scene, GroundTruth> generate_scene(const SyntheticConfig& cfg);

// Positive bags hold one distinct target-mixed pixel plus background pixels;
// negative bags hold only background pixels.  No pixel is reused across
// bags.  Deterministic in cfg.seed, independent of the generate_scene draws.
BagSet sample_bags(const Scene& scene, const GroundTruth& truth,
                   const SyntheticConfig& cfg);

}  // namespace misig
