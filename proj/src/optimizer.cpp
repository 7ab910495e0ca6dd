#include "misig/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "misig/errors.hpp"

namespace misig {

namespace {

void check_mutation(const MutationParams& params) {
  if (!(params.narrow_weight >= 0.0 && params.narrow_weight <= 1.0)) {
    throw InputError("narrow_weight must lie in [0, 1]");
  }
  if (!(params.narrow_sigma > 0.0) || !(params.wide_sigma > params.narrow_sigma)) {
    throw InputError("mutation scales must satisfy 0 < narrow_sigma < wide_sigma");
  }
}

std::vector<const Spectrum*> positive_pixel_pool(const BagSet& bags) {
  std::vector<const Spectrum*> pool;
  for (const Bag& bag : bags.positive) {
    for (const Pixel& pixel : bag.pixels) pool.push_back(&pixel.spectrum);
  }
  return pool;
}

void sort_members(std::vector<PopulationMember>& members) {
  std::stable_sort(members.begin(), members.end(),
                   [](const PopulationMember& a, const PopulationMember& b) {
                     return a.objective > b.objective;
                   });
}

void bump(std::uint64_t* evaluations, std::uint64_t n) {
  if (evaluations) *evaluations += n;
}

}  // namespace

MutationParams default_mutation_params(const BagSet& bags) {
  const std::size_t count = bags.total_positive_pixels();
  if (count == 0) throw InputError("no positive-bag pixels");
  const Eigen::Index bands = bags.bands();

  Spectrum mean = Spectrum::Zero(bands);
  for (const Bag& bag : bags.positive) {
    for (const Pixel& pixel : bag.pixels) mean += pixel.spectrum;
  }
  mean /= static_cast<double>(count);

  double spread = 1.0;
  if (count >= 2) {
    Spectrum ss = Spectrum::Zero(bands);
    for (const Bag& bag : bags.positive) {
      for (const Pixel& pixel : bag.pixels) {
        ss.array() += (pixel.spectrum - mean).array().square();
      }
    }
    spread = (ss / static_cast<double>(count - 1)).cwiseSqrt().mean();
  }
  if (!(spread > 0.0) || !std::isfinite(spread)) spread = 1.0;

  MutationParams params;
  params.narrow_sigma = 0.01 * spread;
  params.wide_sigma = 0.1 * spread;
  return params;
}

Spectrum mutate(const Spectrum& parent, const MutationParams& params, Rng& rng) {
  if (parent.size() == 0) throw InputError("cannot mutate an empty spectrum");
  std::uniform_int_distribution<Eigen::Index> pick(0, parent.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::normal_distribution<double> unit;

  const Eigen::Index coordinate = pick(rng);
  const double sigma =
      coin(rng) < params.narrow_weight ? params.narrow_sigma : params.wide_sigma;
  Spectrum child = parent;
  child[coordinate] += sigma * unit(rng);
  return child;
}

Population init_population(const ObjectiveEvaluator& evaluator,
                           const BagSet& bags, const EAConfig& config,
                           Rng& rng, std::uint64_t* evaluations) {
  if (config.population_size < 2) {
    throw InputError("population_size must be at least 2");
  }
  const std::size_t n = static_cast<std::size_t>(config.population_size);
  const Eigen::Index bands = evaluator.model().bands();

  Population population;
  population.members.reserve(n);

  if (!config.custom_init.empty()) {
    for (const Spectrum& s : config.custom_init) {
      if (population.members.size() == n) break;
      if (s.size() != bands) {
        throw InputError("custom init spectrum has wrong band count");
      }
      if (!s.allFinite()) {
        throw InputError("custom init spectrum has non-finite values");
      }
      population.members.push_back({s, evaluator.value(s)});
      bump(evaluations, 1);
    }
  }

  const std::vector<const Spectrum*> pool = positive_pixel_pool(bags);
  if (pool.empty()) throw InputError("no positive-bag pixels");

  std::vector<double> pool_scores;
  if (population.members.size() < n) {
    pool_scores.reserve(pool.size());
    for (const Spectrum* s : pool) pool_scores.push_back(evaluator.value(*s));
    bump(evaluations, pool.size());

    if (config.custom_init.empty()) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < pool.size(); ++i) {
        if (pool_scores[i] > pool_scores[best]) best = i;
      }
      if (pool_scores[best] == -std::numeric_limits<double>::infinity()) {
        throw DegenerateSignatureError(
            "every positive-bag pixel coincides with the background mean");
      }
      population.members.push_back({*pool[best], pool_scores[best]});
    }

    std::uniform_int_distribution<std::size_t> draw(0, pool.size() - 1);
    while (population.members.size() < n) {
      const std::size_t i = draw(rng);
      population.members.push_back({*pool[i], pool_scores[i]});
    }
  }

  sort_members(population.members);
  return population;
}

Population step(const Population& population,
                const ObjectiveEvaluator& evaluator,
                const MutationParams& params, Rng& rng,
                std::uint64_t* evaluations) {
  if (population.members.empty()) throw InputError("population is empty");
  check_mutation(params);

  std::vector<PopulationMember> pool = population.members;
  pool.reserve(2 * population.members.size());
  for (const PopulationMember& parent : population.members) {
    Spectrum child = mutate(parent.signature, params, rng);
    const double score = evaluator.value(child);
    pool.push_back({std::move(child), score});
  }
  bump(evaluations, population.members.size());

  sort_members(pool);
  pool.resize(population.members.size());

  Population next;
  next.members = std::move(pool);
  return next;
}

EstimationResult run(const BackgroundModel& model, const BagSet& bags,
                     const EAConfig& config,
                     const ObjectiveConfig& objective_config) {
  if (config.population_size < 2) {
    throw InputError("population_size must be at least 2");
  }
  if (config.iterations < 1) {
    throw InputError("iterations must be at least 1");
  }
  if (config.plateau_iterations && *config.plateau_iterations < 1) {
    throw InputError("plateau_iterations must be at least 1");
  }

  const ObjectiveEvaluator evaluator(model, bags, objective_config);
  const MutationParams params =
      config.mutation ? *config.mutation : default_mutation_params(bags);
  check_mutation(params);

  Rng rng(config.seed);
  EstimationResult result;

  Population population =
      init_population(evaluator, bags, config, rng, &result.evaluations);
  result.trace.reserve(static_cast<std::size_t>(config.iterations) + 1);
  result.trace.push_back(population.members.front().objective);

  int stalled = 0;
  for (int iteration = 0; iteration < config.iterations; ++iteration) {
    const double before = population.members.front().objective;
    population = step(population, evaluator, params, rng, &result.evaluations);
    result.trace.push_back(population.members.front().objective);
    if (config.plateau_iterations) {
      stalled = population.members.front().objective - before > 1e-12
                    ? 0
                    : stalled + 1;
      if (stalled >= *config.plateau_iterations) break;
    }
  }

  result.best_signature = population.members.front().signature;
  result.best_objective = population.members.front().objective;
  return result;
}

}  // namespace misig
