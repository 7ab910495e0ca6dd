#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "misig/objective.hpp"

namespace misig {

using Rng = std::mt19937_64;

// Two-component Gaussian mixture applied to one randomly chosen coordinate
// per mutation: a narrow step with probability `narrow_weight`, a wide step
// otherwise.
struct MutationParams {
  double narrow_weight = 0.8;
  double narrow_sigma = 0.0;
  double wide_sigma = 0.0;
};

// Scales derived from the spread of the positive-bag pixels: narrow_sigma is
// 1% of the mean per-band standard deviation, wide_sigma ten times that.
MutationParams default_mutation_params(const BagSet& bags);

struct EAConfig {
  int population_size = 50;
  int iterations = 500;
  std::uint64_t seed = 0;
  std::optional<MutationParams> mutation;  // absent: default_mutation_params
  // Seeds the initial population.  Empty selects the default scheme: the
  // best-scoring positive-bag pixel plus uniformly drawn positive pixels.
  std::vector<Spectrum> custom_init;
  // When set, stop once the best objective has not improved by more than
  // 1e-12 for this many consecutive iterations.
  std::optional<int> plateau_iterations;
};

struct PopulationMember {
  Spectrum signature;
  double objective = 0.0;
};

// Members are kept sorted by objective, best first.
struct Population {
  std::vector<PopulationMember> members;
};

struct EstimationResult {
  Spectrum best_signature;
  double best_objective = 0.0;
  std::vector<double> trace;  // best objective at iterations 0..N
  std::uint64_t evaluations = 0;
};

Spectrum mutate(const Spectrum& parent, const MutationParams& params, Rng& rng);

Population init_population(const ObjectiveEvaluator& evaluator,
                           const BagSet& bags, const EAConfig& config,
                           Rng& rng, std::uint64_t* evaluations = nullptr);

// One elitist generation: each member spawns one mutated child, then the best
// population_size of the pooled parents and children survive.  Ties keep
// parents ahead of children and lower indices ahead of higher.
Population step(const Population& population,
                const ObjectiveEvaluator& evaluator,
                const MutationParams& params, Rng& rng,
                std::uint64_t* evaluations = nullptr);

EstimationResult run(const BackgroundModel& model, const BagSet& bags,
                     const EAConfig& config,
                     const ObjectiveConfig& objective_config = {});

}  // namespace misig
