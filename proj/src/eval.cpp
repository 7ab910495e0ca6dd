#include "misig/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "misig/errors.hpp"

namespace misig {

DetectionMap detection_map(const Scene& scene, const BackgroundModel& model,
                           const Spectrum& signature) {
  if (scene.bands() != model.bands()) {
    throw InputError("scene and model band counts differ");
  }
  Eigen::VectorXd direction = model.whiten(signature);
  const double norm = direction.norm();
  if (norm < kDegenerateNormThreshold) {
    throw DegenerateSignatureError(
        "signature coincides with the background mean");
  }
  direction /= norm;

  DetectionMap map;
  map.rows = scene.rows;
  map.cols = scene.cols;
  map.scores.resize(scene.pixel_count());
  const auto factor = model.cholesky_factor().triangularView<Eigen::Lower>();
  Eigen::VectorXd buffer(scene.bands());
  for (Eigen::Index i = 0; i < scene.pixel_count(); ++i) {
    buffer = scene.pixels.col(i) - model.mean();
    factor.solveInPlace(buffer);
    map.scores[i] = direction.dot(buffer);
  }
  return map;
}

namespace {

// Per-target best response and the surviving false-alarm pool under a halo.
struct HaloPools {
  std::vector<double> target_scores;
  std::vector<double> background_scores;
};

HaloPools halo_pools(const DetectionMap& map, const GroundTruth& truth,
                     int halo_radius) {
  HaloPools pools;
  std::vector<Eigen::Index> targets;
  for (Eigen::Index i = 0; i < truth.abundance.size(); ++i) {
    if (truth.abundance[i] > 0.0) targets.push_back(i);
  }

  if (halo_radius <= 0) {
    pools.target_scores.reserve(targets.size());
    std::size_t next = 0;
    for (Eigen::Index i = 0; i < map.scores.size(); ++i) {
      if (next < targets.size() && targets[next] == i) {
        pools.target_scores.push_back(map.scores[i]);
        ++next;
      } else {
        pools.background_scores.push_back(map.scores[i]);
      }
    }
    return pools;
  }

  const long radius_sq = static_cast<long>(halo_radius) * halo_radius;
  std::vector<char> in_halo(static_cast<std::size_t>(map.scores.size()), 0);
  for (Eigen::Index t : targets) {
    const int tr = static_cast<int>(t / map.cols);
    const int tc = static_cast<int>(t % map.cols);
    double best = -std::numeric_limits<double>::infinity();
    for (int r = std::max(0, tr - halo_radius);
         r <= std::min(map.rows - 1, tr + halo_radius); ++r) {
      for (int c = std::max(0, tc - halo_radius);
           c <= std::min(map.cols - 1, tc + halo_radius); ++c) {
        const long dr = r - tr;
        const long dc = c - tc;
        if (dr * dr + dc * dc > radius_sq) continue;
        const Eigen::Index i = static_cast<Eigen::Index>(r) * map.cols + c;
        in_halo[static_cast<std::size_t>(i)] = 1;
        best = std::max(best, map.scores[i]);
      }
    }
    pools.target_scores.push_back(best);
  }
  for (Eigen::Index i = 0; i < map.scores.size(); ++i) {
    if (!in_halo[static_cast<std::size_t>(i)]) {
      pools.background_scores.push_back(map.scores[i]);
    }
  }
  return pools;
}

}  // namespace

RocCurve roc(const DetectionMap& map, const GroundTruth& truth,
             double area_per_pixel, double max_far, int halo_radius) {
  if (map.rows != truth.rows || map.cols != truth.cols ||
      map.scores.size() != truth.abundance.size()) {
    throw InputError("map and truth extents differ");
  }
  if (!(area_per_pixel > 0.0)) {
    throw InputError("area_per_pixel must be positive");
  }
  if (!(max_far > 0.0)) {
    throw InputError("max_far must be positive");
  }
  if (!map.scores.allFinite()) {
    throw InputError("detection map contains non-finite scores");
  }

  HaloPools pools = halo_pools(map, truth, halo_radius);
  if (pools.target_scores.empty()) {
    throw InputError("truth marks no target pixels");
  }

  std::sort(pools.target_scores.begin(), pools.target_scores.end(),
            std::greater<>());
  std::sort(pools.background_scores.begin(), pools.background_scores.end(),
            std::greater<>());

  const double n_targets = static_cast<double>(pools.target_scores.size());
  const double denominator =
      static_cast<double>(pools.background_scores.size()) * area_per_pixel;

  // Merge the two descending score lists, emitting one point per distinct
  // threshold with counts of scores >= it.
  RocCurve curve;
  curve.area_per_pixel = area_per_pixel;
  std::size_t ti = 0;
  std::size_t bi = 0;
  while (ti < pools.target_scores.size() ||
         bi < pools.background_scores.size()) {
    double threshold;
    if (ti < pools.target_scores.size() &&
        bi < pools.background_scores.size()) {
      threshold = std::max(pools.target_scores[ti],
                           pools.background_scores[bi]);
    } else if (ti < pools.target_scores.size()) {
      threshold = pools.target_scores[ti];
    } else {
      threshold = pools.background_scores[bi];
    }
    while (ti < pools.target_scores.size() &&
           pools.target_scores[ti] >= threshold) {
      ++ti;
    }
    while (bi < pools.background_scores.size() &&
           pools.background_scores[bi] >= threshold) {
      ++bi;
    }
    const double far =
        denominator > 0.0 ? static_cast<double>(bi) / denominator : 0.0;
    if (far > max_far) break;
    curve.points.push_back(
        {threshold, far, static_cast<double>(ti) / n_targets});
  }
  return curve;
}

double pd_at_far(const RocCurve& curve, double far) {
  double best = 0.0;
  for (const RocPoint& point : curve.points) {
    if (point.far <= far) best = std::max(best, point.pd);
  }
  return best;
}

GridSearchResult grid_search_2d(const BackgroundModel& model,
                                const BagSet& bags,
                                const ObjectiveConfig& objective_config,
                                const std::array<GridBounds, 2>& bounds,
                                double step) {
  if (model.bands() != 2) {
    throw InputError("grid search requires a two-band model");
  }
  if (!(step > 0.0)) throw InputError("step must be positive");
  for (const GridBounds& b : bounds) {
    if (!(b.hi > b.lo)) throw InputError("bounds must satisfy lo < hi");
  }

  const ObjectiveEvaluator evaluator(model, bags, objective_config);

  GridSearchResult result;
  result.bounds = bounds;
  result.step = step;
  // Small forward nudge so ranges that are exact multiples of the step keep
  // their endpoint despite rounding.
  result.n0 = static_cast<Eigen::Index>(
                  std::floor((bounds[0].hi - bounds[0].lo) / step + 1e-9)) +
              1;
  result.n1 = static_cast<Eigen::Index>(
                  std::floor((bounds[1].hi - bounds[1].lo) / step + 1e-9)) +
              1;
  result.values.resize(result.n0 * result.n1);

  Spectrum candidate(2);
  double best = -std::numeric_limits<double>::infinity();
  Eigen::Index best_i = 0;
  Eigen::Index best_j = 0;
  for (Eigen::Index i = 0; i < result.n0; ++i) {
    candidate[0] = bounds[0].lo + static_cast<double>(i) * step;
    for (Eigen::Index j = 0; j < result.n1; ++j) {
      candidate[1] = bounds[1].lo + static_cast<double>(j) * step;
      const double value = evaluator.value(candidate);
      result.values[i * result.n1 + j] = value;
      if (value > best) {
        best = value;
        best_i = i;
        best_j = j;
      }
    }
  }
  if (best == -std::numeric_limits<double>::infinity()) {
    throw NumericError("every lattice point is degenerate");
  }

  result.argmax = Spectrum(2);
  result.argmax[0] = bounds[0].lo + static_cast<double>(best_i) * step;
  result.argmax[1] = bounds[1].lo + static_cast<double>(best_j) * step;
  result.argmax_value = best;
  return result;
}

GridSearchResult grid_search_2d(const BackgroundModel& model,
                                const BagSet& bags,
                                const ObjectiveConfig& objective_config,
                                const GridBounds& bounds, double step) {
  return grid_search_2d(model, bags, objective_config,
                        std::array<GridBounds, 2>{bounds, bounds}, step);
}

}  // namespace misig
