#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "misig/background.hpp"
#include "misig/errors.hpp"
#include "misig/eval.hpp"
#include "misig/io.hpp"
#include "misig/optimizer.hpp"
#include "misig/synth.hpp"

namespace {

struct SceneOptions {
  std::string path;
  int rows = 0;  // optional declared extent for CSV scenes
  int cols = 0;
};

misig::RunConfig load_config(const std::string& path) {
  return path.empty() ? misig::default_run_config()
                      : misig::load_run_config(path);
}

misig::Scene load_processed_scene(const misig::RunConfig& config,
                                  const SceneOptions& options) {
  misig::Scene scene =
      options.rows > 0 || options.cols > 0
          ? misig::load_scene(options.path, options.rows, options.cols)
          : misig::load_scene(options.path);
  if (config.band_average_factor > 1) {
    scene = misig::band_average(scene, config.band_average_factor);
  }
  return scene;
}

misig::BackgroundModel fit_model(const misig::RunConfig& config,
                                 const misig::Scene& scene,
                                 const misig::BagSet* bags) {
  if (config.fit_from_negative_bags) {
    if (!bags) {
      throw misig::InputError(
          "background fit 'negative-bags' needs a bag spec; pass --bags or "
          "set paths.bags in the config");
    }
    std::vector<misig::Spectrum> pixels;
    for (const misig::Bag& bag : bags->negative) {
      for (const misig::Pixel& pixel : bag.pixels) {
        pixels.push_back(pixel.spectrum);
      }
    }
    if (pixels.empty()) {
      throw misig::InputError("no negative-bag pixels to fit the background");
    }
    return misig::fit_background(pixels, config.background_regularization);
  }
  return misig::fit_background(scene.pixels, config.background_regularization);
}

void add_scene_options(CLI::App* cmd, SceneOptions& options) {
  cmd->add_option("--scene", options.path, "Scene file (native or CSV)")
      ->required();
  cmd->add_option("--rows", options.rows, "Declared row count for CSV scenes");
  cmd->add_option("--cols", options.cols,
                  "Declared column count for CSV scenes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Target signature estimation from bag-labeled pixels"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Run configuration JSON")
      ->envname("MISIG_CONFIG");

  auto* generate = app.add_subcommand(
      "generate", "Generate a synthetic scene, ground truth, and bags");
  std::string generate_scene_path;
  std::string generate_truth_path;
  std::string generate_bags_path;
  std::optional<std::uint64_t> generate_seed;
  generate->add_option("--out-scene", generate_scene_path, "Scene output path")
      ->required();
  generate->add_option("--out-truth", generate_truth_path,
                       "Ground-truth output path");
  generate->add_option("--out-bags", generate_bags_path,
                       "Bag spec output path");
  generate->add_option("--seed", generate_seed,
                       "Override the configured synthesis seed");

  auto* estimate = app.add_subcommand(
      "estimate", "Estimate a target signature from bag-labeled pixels");
  SceneOptions estimate_scene;
  std::string estimate_bags_path;
  std::string estimate_out_path;
  std::optional<std::uint64_t> estimate_seed;
  add_scene_options(estimate, estimate_scene);
  estimate->add_option("--bags", estimate_bags_path, "Bag spec JSON")
      ->required();
  estimate->add_option("--out", estimate_out_path, "Result JSON output path")
      ->required();
  estimate->add_option("--seed", estimate_seed,
                       "Override the configured optimizer seed");

  auto* detect = app.add_subcommand(
      "detect", "Write the matched-filter detection map for a signature");
  SceneOptions detect_scene;
  std::string detect_signature_path;
  std::string detect_out_path;
  add_scene_options(detect, detect_scene);
  detect
      ->add_option("--signature", detect_signature_path,
                   "Signature JSON (array or estimation result)")
      ->required();
  detect->add_option("--out", detect_out_path, "Detection map output path")
      ->required();

  auto* roc = app.add_subcommand(
      "roc", "Score a detection map against ground truth");
  std::string roc_map_path;
  std::string roc_truth_path;
  std::string roc_out_path;
  std::optional<double> roc_area;
  std::optional<double> roc_max_far;
  std::optional<int> roc_halo;
  roc->add_option("--map", roc_map_path, "Detection map file")->required();
  roc->add_option("--truth", roc_truth_path, "Ground-truth file")->required();
  roc->add_option("--out", roc_out_path, "Curve CSV output path")->required();
  roc->add_option("--area", roc_area, "Area per pixel in square meters");
  roc->add_option("--max-far", roc_max_far, "Truncate the curve at this FAR");
  roc->add_option("--halo", roc_halo,
                  "Detection halo radius in pixels (0 = pixel-level)");

  auto* grid = app.add_subcommand(
      "grid", "Exhaustive two-band objective search on a lattice");
  SceneOptions grid_scene;
  std::string grid_bags_path;
  std::string grid_out_path;
  std::string grid_summary_path;
  std::vector<double> grid_bounds;
  double grid_step = 0.01;
  add_scene_options(grid, grid_scene);
  grid->add_option("--bags", grid_bags_path, "Bag spec JSON")->required();
  grid->add_option("--out", grid_out_path, "Objective field output path")
      ->required();
  grid->add_option("--out-summary", grid_summary_path,
                   "Argmax summary JSON path (default: <out>.json)");
  grid->add_option("--bounds", grid_bounds,
                   "Lattice bounds as 'lo hi', both dimensions")
      ->expected(2);
  grid->add_option("--step", grid_step, "Lattice step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error[input]: " << e.what() << "\n";
    return 2;
  }

  try {
    misig::RunConfig config = load_config(config_path);

    if (generate->parsed()) {
      if (generate_seed) config.synth.seed = *generate_seed;
      auto [scene, truth] = misig::generate_scene(config.synth);
      misig::save_scene(generate_scene_path, scene);
      std::cout << "scene " << scene.rows << "x" << scene.cols << "x"
                << scene.bands() << " -> " << generate_scene_path << "\n";
      if (!generate_truth_path.empty()) {
        misig::save_truth(generate_truth_path, truth);
        std::cout << "truth -> " << generate_truth_path << "\n";
      }
      if (!generate_bags_path.empty()) {
        const misig::BagSet bags =
            misig::sample_bags(scene, truth, config.synth);
        misig::save_bags(generate_bags_path, bags);
        std::cout << "bags " << bags.positive.size() << "+"
                  << bags.negative.size() << " -> " << generate_bags_path
                  << "\n";
      }
    } else if (estimate->parsed()) {
      if (estimate_seed) config.ea.seed = *estimate_seed;
      const misig::Scene scene = load_processed_scene(config, estimate_scene);
      const misig::BagSet bags = misig::load_bags(estimate_bags_path, scene);
      const misig::BackgroundModel model = fit_model(config, scene, &bags);
      const misig::EstimationResult result =
          misig::run(model, bags, config.ea, config.objective);
      misig::save_estimation_result(estimate_out_path, result);
      std::printf("best objective %.12g after %llu evaluations -> %s\n",
                  result.best_objective,
                  static_cast<unsigned long long>(result.evaluations),
                  estimate_out_path.c_str());
    } else if (detect->parsed()) {
      const misig::Scene scene = load_processed_scene(config, detect_scene);
      const misig::Spectrum signature =
          misig::load_signature(detect_signature_path);
      const misig::BagSet* bags = nullptr;
      misig::BagSet loaded_bags;
      if (config.fit_from_negative_bags && !config.bags_path.empty()) {
        loaded_bags = misig::load_bags(config.bags_path, scene);
        bags = &loaded_bags;
      }
      const misig::BackgroundModel model = fit_model(config, scene, bags);
      misig::save_map(detect_out_path,
                      misig::detection_map(scene, model, signature));
      std::cout << "map -> " << detect_out_path << "\n";
    } else if (roc->parsed()) {
      const misig::DetectionMap map = misig::load_map(roc_map_path);
      const misig::GroundTruth truth = misig::load_truth(roc_truth_path);
      const misig::RocCurve curve = misig::roc(
          map, truth, roc_area.value_or(config.area_per_pixel),
          roc_max_far.value_or(config.max_far),
          roc_halo.value_or(config.halo_radius));
      misig::save_roc_csv(roc_out_path, curve);
      std::cout << curve.points.size() << " points -> " << roc_out_path
                << "\n";
    } else if (grid->parsed()) {
      const misig::Scene scene = load_processed_scene(config, grid_scene);
      const misig::BagSet bags = misig::load_bags(grid_bags_path, scene);
      const misig::BackgroundModel model = fit_model(config, scene, &bags);
      misig::GridBounds bounds;
      if (!grid_bounds.empty()) {
        bounds.lo = grid_bounds[0];
        bounds.hi = grid_bounds[1];
      }
      const misig::GridSearchResult result =
          misig::grid_search_2d(model, bags, config.objective, bounds,
                                grid_step);
      misig::save_grid_field(grid_out_path, result);
      misig::save_grid_summary(grid_summary_path.empty()
                                   ? grid_out_path + ".json"
                                   : grid_summary_path,
                               result);
      std::printf("argmax (%.10g, %.10g) value %.12g -> %s\n",
                  result.argmax[0], result.argmax[1], result.argmax_value,
                  grid_out_path.c_str());
    }
    return 0;
  } catch (const misig::InputError& e) {
    std::cerr << "error[input]: " << e.what() << "\n";
    return 2;
  } catch (const misig::NumericError& e) {
    std::cerr << "error[numeric]: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error[internal]: " << e.what() << "\n";
    return 3;
  }
}
