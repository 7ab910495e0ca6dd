#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "misig/background.hpp"
#include "misig/bags.hpp"

namespace misig {

// Scores a single pixel against a candidate signature; larger means more
// target-like.
class InstanceScorer {
 public:
  virtual ~InstanceScorer() = default;
  virtual double score(const Spectrum& signature, const Spectrum& pixel) const = 0;
};

class MatchedFilterScorer final : public InstanceScorer {
 public:
  explicit MatchedFilterScorer(const BackgroundModel& model) : model_(&model) {}

  double score(const Spectrum& signature, const Spectrum& pixel) const override {
    return model_->matched_filter(signature, pixel);
  }

 private:
  const BackgroundModel* model_;
};

struct ObjectiveConfig {
  // Bag-term weights.  Absent values default to 1/N_pos and 1/N_neg.
  std::optional<double> alpha;
  std::optional<double> beta;
};

struct PositiveBagTerm {
  double score = 0.0;          // max instance score in the bag
  std::size_t argmax_index = 0;  // first pixel attaining the max
};

struct ObjectiveBreakdown {
  double total = 0.0;
  std::vector<double> positive_terms;       // per-bag max scores
  std::vector<double> negative_terms;       // per-bag mean scores (unnegated)
  std::vector<std::size_t> argmax_pixels;   // per positive bag
};

// Max instance score over a positive bag.  Ties resolve to the lowest index.
PositiveBagTerm positive_bag_term(const InstanceScorer& scorer,
                                  const Spectrum& signature, const Bag& bag);

// Negated mean instance score over a negative bag.
double negative_bag_term(const InstanceScorer& scorer,
                         const Spectrum& signature, const Bag& bag);

// Weighted sum alpha * sum_j max_i f + beta * sum_j (-mean_i f) over the set.
// Requires at least one positive bag; an empty negative list contributes 0.
ObjectiveBreakdown objective(const InstanceScorer& scorer,
                             const Spectrum& signature, const BagSet& bags,
                             const ObjectiveConfig& config = {});

ObjectiveBreakdown objective(const BackgroundModel& model,
                             const Spectrum& signature, const BagSet& bags,
                             const ObjectiveConfig& config = {});

// Matched-filter objective with the bag pixels whitened once up front.  Each
// candidate evaluation then costs one triangular solve plus dot products, and
// negative bags collapse to a single mean vector apiece.
class ObjectiveEvaluator {
 public:
  ObjectiveEvaluator(const BackgroundModel& model, const BagSet& bags,
                     ObjectiveConfig config = {});

  // Objective value; -infinity when the signature is degenerate.
  double value(const Spectrum& signature) const;

  // Full per-bag terms.  Throws DegenerateSignatureError at the mean.
  ObjectiveBreakdown breakdown(const Spectrum& signature) const;

  const BackgroundModel& model() const { return *model_; }
  std::size_t positive_bag_count() const { return positive_whitened_.size(); }
  std::size_t negative_bag_count() const { return negative_means_.size(); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

 private:
  Eigen::VectorXd whitened_direction(const Spectrum& signature) const;

  const BackgroundModel* model_;
  double alpha_ = 0.0;
  double beta_ = 0.0;
  std::vector<Eigen::MatrixXd> positive_whitened_;  // bands x bag size
  std::vector<Eigen::VectorXd> negative_means_;     // whitened bag means
};

}  // namespace misig
