#pragma once

// Shared fixtures for the unit tests: tiny literal builders, random instance
// generators, and a deliberately naive objective implementation (explicit
// covariance inverse, plain loops) used as an independent oracle.

#include <Eigen/Dense>
#include <cmath>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "misig/background.hpp"
#include "misig/bags.hpp"
#include "misig/objective.hpp"

namespace testsupport {

using misig::Bag;
using misig::BagLabel;
using misig::BagSet;
using misig::Pixel;
using misig::Spectrum;

inline Spectrum vec(std::initializer_list<double> values) {
  Spectrum s(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) s[i++] = v;
  return s;
}

inline Bag make_bag(std::string id, BagLabel label,
                    std::vector<Spectrum> spectra) {
  Bag bag;
  bag.id = std::move(id);
  bag.label = label;
  for (Spectrum& s : spectra) {
    Pixel pixel;
    pixel.spectrum = std::move(s);
    bag.pixels.push_back(std::move(pixel));
  }
  return bag;
}

inline misig::BackgroundModel identity_model(Eigen::Index d) {
  return misig::background_from_moments(Spectrum::Zero(d),
                                        Eigen::MatrixXd::Identity(d, d), 0.0);
}

// mean (5,5), covariance [[1, .5], [.5, 1]] -- the reference two-band setup.
inline misig::BackgroundModel reference_model() {
  Spectrum mean = vec({5.0, 5.0});
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  return misig::background_from_moments(mean, cov, 0.0);
}

inline Spectrum random_spectrum(std::mt19937_64& rng, Eigen::Index d,
                                double lo = -3.0, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Spectrum s(d);
  for (Eigen::Index i = 0; i < d; ++i) s[i] = u(rng);
  return s;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index d) {
  std::normal_distribution<double> n;
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) a(r, c) = n(rng);
  }
  return a * a.transpose() + 0.25 * Eigen::MatrixXd::Identity(d, d);
}

inline BagSet random_bagset(std::mt19937_64& rng, Eigen::Index d,
                            int n_positive, int n_negative,
                            int max_bag_size = 5) {
  std::uniform_int_distribution<int> size(1, max_bag_size);
  BagSet bags;
  for (int j = 0; j < n_positive; ++j) {
    std::vector<Spectrum> spectra;
    const int count = size(rng);
    for (int i = 0; i < count; ++i) spectra.push_back(random_spectrum(rng, d));
    bags.positive.push_back(
        make_bag("pos-" + std::to_string(j), BagLabel::positive, spectra));
  }
  for (int j = 0; j < n_negative; ++j) {
    std::vector<Spectrum> spectra;
    const int count = size(rng);
    for (int i = 0; i < count; ++i) spectra.push_back(random_spectrum(rng, d));
    bags.negative.push_back(
        make_bag("neg-" + std::to_string(j), BagLabel::negative, spectra));
  }
  return bags;
}

// Eq.-by-eq. reference evaluation through the explicit regularized inverse.
inline double naive_matched_filter(const Spectrum& mean,
                                   const Eigen::MatrixXd& covariance,
                                   double regularization,
                                   const Spectrum& signature,
                                   const Spectrum& pixel) {
  Eigen::MatrixXd regularized = covariance;
  regularized.diagonal().array() += regularization;
  const Eigen::MatrixXd inverse = regularized.inverse();
  const Eigen::VectorXd d = signature - mean;
  const Eigen::VectorXd q = pixel - mean;
  return d.dot(inverse * q) / std::sqrt(d.dot(inverse * d));
}

inline double naive_objective(const Spectrum& mean,
                              const Eigen::MatrixXd& covariance,
                              double regularization, const Spectrum& signature,
                              const BagSet& bags,
                              std::optional<double> alpha = {},
                              std::optional<double> beta = {}) {
  const double a =
      alpha ? *alpha : 1.0 / static_cast<double>(bags.positive.size());
  double positive_sum = 0.0;
  for (const Bag& bag : bags.positive) {
    double best = -std::numeric_limits<double>::infinity();
    for (const Pixel& pixel : bag.pixels) {
      best = std::max(best, naive_matched_filter(mean, covariance,
                                                 regularization, signature,
                                                 pixel.spectrum));
    }
    positive_sum += best;
  }
  double total = a * positive_sum;
  if (!bags.negative.empty()) {
    const double b =
        beta ? *beta : 1.0 / static_cast<double>(bags.negative.size());
    double negative_sum = 0.0;
    for (const Bag& bag : bags.negative) {
      double mean_score = 0.0;
      for (const Pixel& pixel : bag.pixels) {
        mean_score += naive_matched_filter(mean, covariance, regularization,
                                           signature, pixel.spectrum);
      }
      negative_sum += mean_score / static_cast<double>(bag.pixels.size());
    }
    total -= b * negative_sum;
  }
  return total;
}

}  // namespace testsupport
