#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "misig/bags.hpp"

namespace misig {

// Signatures whose whitened norm falls below this are treated as coincident
// with the background mean.
inline constexpr double kDegenerateNormThreshold = 1e-12;

// Gaussian background estimate.  Holds the sample mean, the unregularized
// sample covariance, and a lower-triangular Cholesky factor L with
// L L^T = covariance + regularization * I.  All downstream quadratic forms go
// through triangular solves against L; the inverse is never formed.
class BackgroundModel {
 public:
  BackgroundModel() = default;

  const Spectrum& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::MatrixXd& cholesky_factor() const { return factor_; }
  double regularization() const { return regularization_; }
  Eigen::Index bands() const { return mean_.size(); }

  // L^{-1} (s - mean).  Maps the mean itself to exactly zero.
  Eigen::VectorXd whiten(const Spectrum& s) const;

  // Matched-filter response of `pixel` for candidate signature `signature`:
  // the whitened pixel projected onto the unit whitened signature direction.
  // Throws DegenerateSignatureError when the signature sits at the mean.
  double matched_filter(const Spectrum& signature, const Spectrum& pixel) const;

 private:
  friend BackgroundModel fit_background(const Eigen::MatrixXd&,
                                        std::optional<double>);
  friend BackgroundModel background_from_moments(Spectrum,
                                                 Eigen::MatrixXd,
                                                 std::optional<double>);

  Spectrum mean_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
  double regularization_ = 0.0;
};

// Fits mean and covariance (N-1 normalization) from pixels given as columns
// of a bands x N matrix.  Requires N >= bands + 1.  When `regularization` is
// absent it defaults to 1e-6 * trace(covariance) / bands; pass an explicit
// value (possibly 0) to override.
BackgroundModel fit_background(const Eigen::MatrixXd& pixels,
                               std::optional<double> regularization = {});

BackgroundModel fit_background(const std::vector<Spectrum>& pixels,
                               std::optional<double> regularization = {});

// Builds a model from externally supplied moments.  The covariance must be
// symmetric; the same regularization default applies.
BackgroundModel background_from_moments(Spectrum mean,
                                        Eigen::MatrixXd covariance,
                                        std::optional<double> regularization = {});

inline Eigen::VectorXd whiten(const BackgroundModel& model, const Spectrum& s) {
  return model.whiten(s);
}

inline double matched_filter(const BackgroundModel& model,
                             const Spectrum& signature, const Spectrum& pixel) {
  return model.matched_filter(signature, pixel);
}

}  // namespace misig
