#include "misig/objective.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "misig/errors.hpp"

namespace misig {

namespace {

void require_label(const Bag& bag, BagLabel label) {
  if (bag.label != label) {
    throw InputError("bag '" + bag.id + "' has the wrong label");
  }
  if (bag.pixels.empty()) {
    throw InputError("bag '" + bag.id + "' is empty");
  }
}

}  // namespace

PositiveBagTerm positive_bag_term(const InstanceScorer& scorer,
                                  const Spectrum& signature, const Bag& bag) {
  require_label(bag, BagLabel::positive);
  PositiveBagTerm term;
  term.score = scorer.score(signature, bag.pixels.front().spectrum);
  for (std::size_t i = 1; i < bag.pixels.size(); ++i) {
    const double s = scorer.score(signature, bag.pixels[i].spectrum);
    if (s > term.score) {
      term.score = s;
      term.argmax_index = i;
    }
  }
  return term;
}

double negative_bag_term(const InstanceScorer& scorer,
                         const Spectrum& signature, const Bag& bag) {
  require_label(bag, BagLabel::negative);
  double sum = 0.0;
  for (const Pixel& pixel : bag.pixels) {
    sum += scorer.score(signature, pixel.spectrum);
  }
  return -sum / static_cast<double>(bag.pixels.size());
}

ObjectiveBreakdown objective(const InstanceScorer& scorer,
                             const Spectrum& signature, const BagSet& bags,
                             const ObjectiveConfig& config) {
  if (bags.positive.empty()) {
    throw InputError("objective requires at least one positive bag");
  }
  const double alpha =
      config.alpha.value_or(1.0 / static_cast<double>(bags.positive.size()));
  const double beta =
      bags.negative.empty()
          ? 0.0
          : config.beta.value_or(1.0 /
                                 static_cast<double>(bags.negative.size()));

  ObjectiveBreakdown breakdown;
  double positive_sum = 0.0;
  for (const Bag& bag : bags.positive) {
    const PositiveBagTerm term = positive_bag_term(scorer, signature, bag);
    breakdown.positive_terms.push_back(term.score);
    breakdown.argmax_pixels.push_back(term.argmax_index);
    positive_sum += term.score;
  }
  double negative_sum = 0.0;
  for (const Bag& bag : bags.negative) {
    const double mean = -negative_bag_term(scorer, signature, bag);
    breakdown.negative_terms.push_back(mean);
    negative_sum += mean;
  }
  breakdown.total = alpha * positive_sum - beta * negative_sum;
  return breakdown;
}

ObjectiveBreakdown objective(const BackgroundModel& model,
                             const Spectrum& signature, const BagSet& bags,
                             const ObjectiveConfig& config) {
  return objective(MatchedFilterScorer(model), signature, bags, config);
}

ObjectiveEvaluator::ObjectiveEvaluator(const BackgroundModel& model,
                                       const BagSet& bags,
                                       ObjectiveConfig config)
    : model_(&model) {
  if (bags.positive.empty()) {
    throw InputError("objective requires at least one positive bag");
  }
  alpha_ =
      config.alpha.value_or(1.0 / static_cast<double>(bags.positive.size()));
  beta_ = bags.negative.empty()
              ? 0.0
              : config.beta.value_or(
                    1.0 / static_cast<double>(bags.negative.size()));

  for (const Bag& bag : bags.positive) {
    require_label(bag, BagLabel::positive);
    Eigen::MatrixXd whitened(model.bands(),
                             static_cast<Eigen::Index>(bag.pixels.size()));
    for (std::size_t i = 0; i < bag.pixels.size(); ++i) {
      whitened.col(static_cast<Eigen::Index>(i)) =
          model.whiten(bag.pixels[i].spectrum);
    }
    positive_whitened_.push_back(std::move(whitened));
  }
  for (const Bag& bag : bags.negative) {
    require_label(bag, BagLabel::negative);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(model.bands());
    for (const Pixel& pixel : bag.pixels) {
      mean += model.whiten(pixel.spectrum);
    }
    negative_means_.push_back(mean /
                              static_cast<double>(bag.pixels.size()));
  }
}

Eigen::VectorXd ObjectiveEvaluator::whitened_direction(
    const Spectrum& signature) const {
  Eigen::VectorXd w = model_->whiten(signature);
  const double norm = w.norm();
  if (norm < kDegenerateNormThreshold) return Eigen::VectorXd();
  w /= norm;
  return w;
}

double ObjectiveEvaluator::value(const Spectrum& signature) const {
  const Eigen::VectorXd u = whitened_direction(signature);
  if (u.size() == 0) return -std::numeric_limits<double>::infinity();

  double positive_sum = 0.0;
  for (const Eigen::MatrixXd& bag : positive_whitened_) {
    double best = bag.col(0).dot(u);
    for (Eigen::Index i = 1; i < bag.cols(); ++i) {
      best = std::max(best, bag.col(i).dot(u));
    }
    positive_sum += best;
  }
  double negative_sum = 0.0;
  for (const Eigen::VectorXd& mean : negative_means_) {
    negative_sum += mean.dot(u);
  }
  return alpha_ * positive_sum - beta_ * negative_sum;
}

ObjectiveBreakdown ObjectiveEvaluator::breakdown(
    const Spectrum& signature) const {
  const Eigen::VectorXd u = whitened_direction(signature);
  if (u.size() == 0) {
    throw DegenerateSignatureError(
        "signature coincides with the background mean");
  }

  ObjectiveBreakdown breakdown;
  double positive_sum = 0.0;
  for (const Eigen::MatrixXd& bag : positive_whitened_) {
    const Eigen::VectorXd scores = bag.transpose() * u;
    Eigen::Index argmax = 0;
    const double best = scores.maxCoeff(&argmax);
    breakdown.positive_terms.push_back(best);
    breakdown.argmax_pixels.push_back(static_cast<std::size_t>(argmax));
    positive_sum += best;
  }
  double negative_sum = 0.0;
  for (const Eigen::VectorXd& mean : negative_means_) {
    const double m = mean.dot(u);
    breakdown.negative_terms.push_back(m);
    negative_sum += m;
  }
  breakdown.total = alpha_ * positive_sum - beta_ * negative_sum;
  return breakdown;
}

}  // namespace misig
