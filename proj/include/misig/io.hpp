#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "misig/bags.hpp"
#include "misig/eval.hpp"
#include "misig/optimizer.hpp"
#include "misig/synth.hpp"

namespace misig {

// Native cube format: 6 magic bytes "MISIG1", then rows, cols, bands as
// little-endian unsigned 32-bit integers, then rows*cols*bands little-endian
// 32-bit floats, band-interleaved by pixel in row-major pixel order.  Maps,
// truths, and grid fields reuse it with bands = 1.
//
// All writers go through a temporary file and an atomic rename, so a failed
// write never leaves a partial file behind.

// Auto-detects the format: native when the file starts with the magic,
// one-pixel-per-line CSV otherwise (loaded as a rows x 1 scene).
Scene load_scene(const std::filesystem::path& path);

// As above with a declared extent.  CSV lines are laid out row-major; native
// files must already carry the same extent.
Scene load_scene(const std::filesystem::path& path, int rows, int cols);

void save_scene(const std::filesystem::path& path, const Scene& scene);

DetectionMap load_map(const std::filesystem::path& path);
void save_map(const std::filesystem::path& path, const DetectionMap& map);

// Abundances only; the loaded truth has an empty target spectrum.
GroundTruth load_truth(const std::filesystem::path& path);
void save_truth(const std::filesystem::path& path, const GroundTruth& truth);

// Bag spec JSON: {"bags": [{"id", "label": "positive"|"negative", and either
// "region": {"row0","col0","row1","col1"} (inclusive) or "pixels": [[row,
// col], ...]}]}.  Regions expand row-major against the scene.  Overlapping
// bags are permitted with a warning on stderr.
BagSet load_bags(const std::filesystem::path& path, const Scene& scene);

// Writes the bag spec with explicit pixel lists; every pixel needs a location.
void save_bags(const std::filesystem::path& path, const BagSet& bags);

void save_estimation_result(const std::filesystem::path& path,
                            const EstimationResult& result);
EstimationResult load_estimation_result(const std::filesystem::path& path);

// Accepts either a bare JSON array or an estimation result document.
Spectrum load_signature(const std::filesystem::path& path);

// One "threshold,far,pd" header line, then one row per curve point.
void save_roc_csv(const std::filesystem::path& path, const RocCurve& curve);

// The dense objective field as a native n0 x n1 single-band cube.  Degenerate
// lattice points carry -infinity, so the field is for rendering, not for
// reloading through the scene/map loaders.
void save_grid_field(const std::filesystem::path& path,
                     const GridSearchResult& result);
void save_grid_summary(const std::filesystem::path& path,
                       const GridSearchResult& result);

// Contiguous groups of `factor` bands averaged together; a trailing remainder
// joins the last group.
Scene band_average(const Scene& scene, int factor);

struct RunConfig {
  SyntheticConfig synth;
  EAConfig ea;
  ObjectiveConfig objective;
  std::optional<double> background_regularization;
  // Fit the background from negative-bag pixels instead of the whole scene.
  bool fit_from_negative_bags = false;
  double area_per_pixel = 1.0;
  double max_far = 1e-3;
  int halo_radius = 0;
  int band_average_factor = 1;
  std::string scene_path;
  std::string bags_path;
  std::string truth_path;
  std::string output_path;
};

// The reference experiment end to end: default_synthetic_config plus the
// optimizer and ROC defaults.
RunConfig default_run_config();

// Every key is optional and falls back to the default config.  Unknown keys
// and out-of-range values are rejected; referenced input paths must exist.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace misig
