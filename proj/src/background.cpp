#include "misig/background.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "misig/errors.hpp"

namespace misig {

namespace {

struct Factorization {
  Eigen::MatrixXd factor;
  double regularization = 0.0;
};

Factorization factorize(const Spectrum& mean, const Eigen::MatrixXd& covariance,
                        std::optional<double> regularization) {
  const Eigen::Index d = mean.size();
  if (covariance.rows() != d || covariance.cols() != d) {
    throw InputError("covariance shape does not match mean dimension");
  }
  if (!mean.allFinite() || !covariance.allFinite()) {
    throw InputError("background moments contain non-finite values");
  }
  const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
  const double scale = 1.0 + covariance.cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale) {
    throw InputError("covariance is not symmetric");
  }

  Factorization result;
  result.regularization = regularization.value_or(
      1e-6 * covariance.trace() / static_cast<double>(d));
  if (!(result.regularization >= 0.0) ||
      !std::isfinite(result.regularization)) {
    throw InputError("regularization must be finite and non-negative");
  }

  Eigen::MatrixXd regularized =
      0.5 * (covariance + covariance.transpose().eval());
  regularized.diagonal().array() += result.regularization;

  Eigen::LLT<Eigen::MatrixXd> llt(regularized);
  if (llt.info() != Eigen::Success) {
    throw SingularBackgroundError(
        "regularized covariance is not positive definite (regularization " +
        std::to_string(result.regularization) + ")");
  }
  result.factor = llt.matrixL();
  return result;
}

}  // namespace

Eigen::VectorXd BackgroundModel::whiten(const Spectrum& s) const {
  if (s.size() != bands()) {
    throw InputError("spectrum has " + std::to_string(s.size()) +
                     " bands, model has " + std::to_string(bands()));
  }
  return factor_.triangularView<Eigen::Lower>().solve((s - mean_).eval());
}

double BackgroundModel::matched_filter(const Spectrum& signature,
                                       const Spectrum& pixel) const {
  const Eigen::VectorXd ws = whiten(signature);
  const double norm = ws.norm();
  if (norm < kDegenerateNormThreshold) {
    throw DegenerateSignatureError(
        "signature coincides with the background mean");
  }
  return ws.dot(whiten(pixel)) / norm;
}

BackgroundModel fit_background(const Eigen::MatrixXd& pixels,
                               std::optional<double> regularization) {
  const Eigen::Index d = pixels.rows();
  const Eigen::Index n = pixels.cols();
  if (d < 1) throw InputError("pixels must have at least one band");
  if (n < d + 1) {
    throw InputError("need at least " + std::to_string(d + 1) +
                     " pixels to fit " + std::to_string(d) +
                     " bands, got " + std::to_string(n));
  }
  if (!pixels.allFinite()) {
    throw InputError("pixels contain non-finite values");
  }

  Spectrum mean = pixels.rowwise().mean();
  Eigen::MatrixXd centered = pixels.colwise() - mean;
  Eigen::MatrixXd covariance =
      centered * centered.transpose() / static_cast<double>(n - 1);

  Factorization factorization = factorize(mean, covariance, regularization);
  BackgroundModel model;
  model.mean_ = std::move(mean);
  model.covariance_ = std::move(covariance);
  model.factor_ = std::move(factorization.factor);
  model.regularization_ = factorization.regularization;
  return model;
}

BackgroundModel fit_background(const std::vector<Spectrum>& pixels,
                               std::optional<double> regularization) {
  if (pixels.empty()) throw InputError("no pixels to fit");
  const Eigen::Index d = pixels.front().size();
  Eigen::MatrixXd matrix(d, static_cast<Eigen::Index>(pixels.size()));
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    if (pixels[i].size() != d) {
      throw InputError("pixel " + std::to_string(i) +
                       " has inconsistent band count");
    }
    matrix.col(static_cast<Eigen::Index>(i)) = pixels[i];
  }
  return fit_background(matrix, regularization);
}

BackgroundModel background_from_moments(Spectrum mean,
                                        Eigen::MatrixXd covariance,
                                        std::optional<double> regularization) {
  if (mean.size() < 1) throw InputError("mean must have at least one band");
  Factorization factorization = factorize(mean, covariance, regularization);
  BackgroundModel model;
  model.mean_ = std::move(mean);
  model.covariance_ = std::move(covariance);
  model.factor_ = std::move(factorization.factor);
  model.regularization_ = factorization.regularization;
  return model;
}

}  // namespace misig
