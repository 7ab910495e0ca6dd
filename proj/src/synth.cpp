#include "misig/synth.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "misig/errors.hpp"

namespace misig {

namespace {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keeps the bag draws stable under changes to how many variates generation
// consumes, and vice versa.
constexpr std::uint64_t kBagStreamSalt = 0x6261677321ULL;

void check_config(const SyntheticConfig& cfg) {
  if (cfg.rows < 1 || cfg.cols < 1) {
    throw InputError("scene extent must be positive");
  }
  const Eigen::Index d = cfg.bg_mean.size();
  if (d < 1) throw InputError("bg_mean must have at least one band");
  if (cfg.bg_cov.rows() != d || cfg.bg_cov.cols() != d) {
    throw InputError("bg_cov shape does not match bg_mean");
  }
  if (cfg.target.size() != d) {
    throw InputError("target dimension does not match bg_mean");
  }
  if (!cfg.bg_mean.allFinite() || !cfg.bg_cov.allFinite() ||
      !cfg.target.allFinite()) {
    throw InputError("synthetic config contains non-finite values");
  }
  const double asym = (cfg.bg_cov - cfg.bg_cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * (1.0 + cfg.bg_cov.cwiseAbs().maxCoeff())) {
    throw InputError("bg_cov is not symmetric");
  }
  if (!(cfg.proportion_lo > 0.0 && cfg.proportion_lo <= cfg.proportion_hi &&
        cfg.proportion_hi <= 1.0)) {
    throw InputError("proportion range must satisfy 0 < lo <= hi <= 1");
  }
  if (cfg.n_pos_bags < 1 || cfg.pos_bag_size < 1 || cfg.n_neg_bags < 1 ||
      cfg.neg_bag_size < 1) {
    throw InputError("bag counts and sizes must be positive");
  }
}

// Square root of a positive semidefinite matrix via pivoted LDL^T, with the
// tiny negative eigenvalue residue of exact semidefiniteness clamped to zero.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success) {
    throw InputError("bg_cov is not positive semidefinite");
  }
  Eigen::VectorXd diag = ldlt.vectorD();
  const double tol = 1e-12 * std::max(1.0, cov.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] < -tol) {
      throw InputError("bg_cov is not positive semidefinite");
    }
    diag[i] = std::sqrt(std::max(diag[i], 0.0));
  }
  Eigen::MatrixXd root = ldlt.matrixL();
  root = root * diag.asDiagonal();
  return ldlt.transpositionsP().transpose() * root;
}

std::vector<PixelLocation> resolve_locations(const SyntheticConfig& cfg) {
  std::vector<PixelLocation> locations =
      cfg.target_locations ? *cfg.target_locations
                           : default_target_grid(cfg.rows, cfg.cols);
  for (const PixelLocation& loc : locations) {
    if (loc.row < 0 || loc.row >= cfg.rows || loc.col < 0 ||
        loc.col >= cfg.cols) {
      throw InputError("target location (" + std::to_string(loc.row) + ", " +
                       std::to_string(loc.col) + ") is outside the scene");
    }
  }
  std::sort(locations.begin(), locations.end(),
            [](const PixelLocation& a, const PixelLocation& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  if (std::adjacent_find(locations.begin(), locations.end()) !=
      locations.end()) {
    throw InputError("duplicate target locations");
  }
  return locations;
}

}  // namespace

SyntheticConfig default_synthetic_config() {
  SyntheticConfig cfg;
  cfg.bg_mean = Spectrum(2);
  cfg.bg_mean << 5.0, 5.0;
  cfg.bg_cov = Eigen::MatrixXd(2, 2);
  cfg.bg_cov << 1.0, 0.5, 0.5, 1.0;
  cfg.target = Spectrum(2);
  cfg.target << 10.0, 3.0;
  return cfg;
}

std::vector<PixelLocation> default_target_grid(int rows, int cols) {
  std::vector<PixelLocation> grid;
  for (int r = 5; r < rows; r += 10) {
    for (int c = 5; c < cols; c += 10) {
      grid.push_back({r, c});
    }
  }
  return grid;
}

Spectrum mix_pixel(const Spectrum& background, const Spectrum& target,
                   double proportion) {
  if (background.size() != target.size()) {
    throw InputError("background and target dimensions differ");
  }
  if (!(proportion >= 0.0 && proportion <= 1.0)) {
    throw InputError("proportion must lie in [0, 1]");
  }
  return proportion * target + (1.0 - proportion) * background;
}

std::pair<Scene, GroundTruth> generate_scene(const SyntheticConfig& cfg) {
  check_config(cfg);
  const std::vector<PixelLocation> locations = resolve_locations(cfg);

  const Eigen::Index d = cfg.bg_mean.size();
  const Eigen::Index count =
      static_cast<Eigen::Index>(cfg.rows) * cfg.cols;
  const Eigen::MatrixXd root = psd_sqrt(0.5 * (cfg.bg_cov +
                                               cfg.bg_cov.transpose().eval()));

  Scene scene;
  scene.rows = cfg.rows;
  scene.cols = cfg.cols;
  scene.pixels.resize(d, count);

  Rng rng(cfg.seed);
  std::normal_distribution<double> unit;
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index b = 0; b < d; ++b) z[b] = unit(rng);
    scene.pixels.col(i) = cfg.bg_mean + root * z;
  }

  GroundTruth truth;
  truth.rows = cfg.rows;
  truth.cols = cfg.cols;
  truth.abundance = Eigen::VectorXd::Zero(count);
  truth.target = cfg.target;

  std::uniform_real_distribution<double> proportion(cfg.proportion_lo,
                                                    cfg.proportion_hi);
  for (const PixelLocation& loc : locations) {
    const Eigen::Index i = scene.index(loc.row, loc.col);
    const double p = proportion(rng);
    scene.pixels.col(i) = mix_pixel(scene.pixels.col(i), cfg.target, p);
    truth.abundance[i] = p;
  }
  return {std::move(scene), std::move(truth)};
}

BagSet sample_bags(const Scene& scene, const GroundTruth& truth,
                   const SyntheticConfig& cfg) {
  check_config(cfg);
  if (scene.rows != truth.rows || scene.cols != truth.cols ||
      scene.pixel_count() != truth.abundance.size()) {
    throw InputError("scene and truth extents differ");
  }

  std::vector<Eigen::Index> mixed;
  std::vector<Eigen::Index> clean;
  for (Eigen::Index i = 0; i < truth.abundance.size(); ++i) {
    (truth.abundance[i] > 0.0 ? mixed : clean).push_back(i);
  }

  const std::size_t need_mixed = static_cast<std::size_t>(cfg.n_pos_bags);
  const std::size_t need_clean =
      static_cast<std::size_t>(cfg.n_pos_bags) * (cfg.pos_bag_size - 1) +
      static_cast<std::size_t>(cfg.n_neg_bags) * cfg.neg_bag_size;
  if (mixed.size() < need_mixed) {
    throw InputError("not enough target-mixed pixels for " +
                     std::to_string(cfg.n_pos_bags) + " positive bags");
  }
  if (clean.size() < need_clean) {
    throw InputError("not enough background pixels for the requested bags");
  }

  Rng rng(splitmix64(cfg.seed ^ kBagStreamSalt));
  std::shuffle(mixed.begin(), mixed.end(), rng);
  std::shuffle(clean.begin(), clean.end(), rng);

  auto take_pixel = [&scene](Eigen::Index i) {
    Pixel pixel;
    pixel.spectrum = scene.pixels.col(i);
    pixel.location = PixelLocation{static_cast<int>(i / scene.cols),
                                   static_cast<int>(i % scene.cols)};
    return pixel;
  };

  BagSet bags;
  std::size_t next_clean = 0;
  for (int b = 0; b < cfg.n_pos_bags; ++b) {
    Bag bag;
    bag.id = "pos-" + std::to_string(b + 1);
    bag.label = BagLabel::positive;
    bag.pixels.push_back(take_pixel(mixed[static_cast<std::size_t>(b)]));
    for (int k = 1; k < cfg.pos_bag_size; ++k) {
      bag.pixels.push_back(take_pixel(clean[next_clean++]));
    }
    std::shuffle(bag.pixels.begin(), bag.pixels.end(), rng);
    bags.positive.push_back(std::move(bag));
  }
  for (int b = 0; b < cfg.n_neg_bags; ++b) {
    Bag bag;
    bag.id = "neg-" + std::to_string(b + 1);
    bag.label = BagLabel::negative;
    for (int k = 0; k < cfg.neg_bag_size; ++k) {
      bag.pixels.push_back(take_pixel(clean[next_clean++]));
    }
    bags.negative.push_back(std::move(bag));
  }
  return bags;
}

}  // namespace misig
