#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "misig/background.hpp"
#include "misig/objective.hpp"
#include "misig/synth.hpp"

namespace misig {

struct DetectionMap {
  int rows = 0;
  int cols = 0;
  Eigen::VectorXd scores;  // row-major, one matched-filter response per pixel
};

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // false alarms per m^2
  double pd = 0.0;   // detected targets / total targets
};

struct RocCurve {
  std::vector<RocPoint> points;
  double area_per_pixel = 1.0;
};

struct GridBounds {
  double lo = 0.0;
  double hi = 11.0;
};

struct GridSearchResult {
  std::array<GridBounds, 2> bounds;
  double step = 0.01;
  Eigen::Index n0 = 0;  // lattice size along dimension 0
  Eigen::Index n1 = 0;
  Eigen::VectorXd values;  // row-major n0 x n1 objective field
  Spectrum argmax;
  double argmax_value = 0.0;
};

// Matched-filter response of every scene pixel against the signature.
DetectionMap detection_map(const Scene& scene, const BackgroundModel& model,
                           const Spectrum& signature);

// Threshold sweep over the distinct scores, descending.  A pixel is detected
// at a threshold when its score is >= it; far counts false-alarm background
// pixels per m^2 (background pixel count x area_per_pixel).  Points with
// far beyond max_far are dropped.  With halo_radius > 0 a target counts as
// detected when any pixel within that Euclidean pixel distance reaches the
// threshold, and background pixels inside any halo leave the false-alarm
// pool.
RocCurve roc(const DetectionMap& map, const GroundTruth& truth,
             double area_per_pixel, double max_far, int halo_radius = 0);

// Largest pd among curve points with far <= the given value (the staircase
// reading of the truncated curve); 0 when no point qualifies.
double pd_at_far(const RocCurve& curve, double far);

// Exhaustive objective evaluation over a two-band lattice: dimension k takes
// values bounds[k].lo + i * step up to bounds[k].hi.  Degenerate lattice
// points score -infinity.  Ties on the argmax resolve to the lexicographically
// first lattice point.
GridSearchResult grid_search_2d(const BackgroundModel& model,
                                const BagSet& bags,
                                const ObjectiveConfig& objective_config,
                                const std::array<GridBounds, 2>& bounds,
                                double step);

GridSearchResult grid_search_2d(const BackgroundModel& model,
                                const BagSet& bags,
                                const ObjectiveConfig& objective_config,
                                const GridBounds& bounds = {},
                                double step = 0.01);

}  // namespace misig
