#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "misig/background.hpp"
#include "misig/errors.hpp"
#include "support.hpp"

using namespace misig;
using testsupport::identity_model;
using testsupport::naive_matched_filter;
using testsupport::random_spd;
using testsupport::random_spectrum;
using testsupport::reference_model;
using testsupport::vec;

TEST_CASE("fit_background recovers moments of a symmetric four-point cloud") {
  Eigen::MatrixXd pixels(2, 4);
  pixels.col(0) = vec({0.0, 0.0});
  pixels.col(1) = vec({2.0, 0.0});
  pixels.col(2) = vec({0.0, 2.0});
  pixels.col(3) = vec({2.0, 2.0});

  const BackgroundModel model = fit_background(pixels, 0.0);
  CHECK(model.mean().isApprox(vec({1.0, 1.0})));
  CHECK(model.covariance()(0, 0) == doctest::Approx(4.0 / 3.0));
  CHECK(model.covariance()(1, 1) == doctest::Approx(4.0 / 3.0));
  CHECK(model.covariance()(0, 1) == doctest::Approx(0.0));
  CHECK(model.regularization() == 0.0);
}

TEST_CASE("fit_background needs more pixels than bands") {
  Eigen::MatrixXd pixels(3, 3);
  pixels.setRandom();
  CHECK_THROWS_AS(fit_background(pixels), InputError);
}

TEST_CASE("identical pixels are rescued by explicit regularization") {
  Eigen::MatrixXd pixels(2, 3);
  pixels.col(0) = vec({1.0, 2.0});
  pixels.col(1) = vec({1.0, 2.0});
  pixels.col(2) = vec({1.0, 2.0});

  CHECK_THROWS_AS(fit_background(pixels, 0.0), SingularBackgroundError);

  const BackgroundModel model = fit_background(pixels, 1e-6);
  CHECK(model.regularization() == 1e-6);
  CHECK(model.whiten(model.mean()).norm() == 0.0);
}

TEST_CASE("default regularization scales with the covariance trace") {
  Eigen::MatrixXd pixels(2, 64);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (Eigen::Index i = 0; i < pixels.cols(); ++i) {
    pixels(0, i) = 10.0 * n(rng);
    pixels(1, i) = 10.0 * n(rng);
  }
  const BackgroundModel model = fit_background(pixels);
  const double expected = 1e-6 * model.covariance().trace() / 2.0;
  CHECK(model.regularization() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("fitting a large Gaussian sample recovers the generator moments") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n;
  Eigen::MatrixXd l(2, 2);
  l << 1.0, 0.0, 0.5, std::sqrt(0.75);  // Cholesky factor of [[1,.5],[.5,1]]
  Eigen::MatrixXd pixels(2, 10000);
  for (Eigen::Index i = 0; i < pixels.cols(); ++i) {
    const Eigen::Vector2d z{n(rng), n(rng)};
    pixels.col(i) = vec({5.0, 5.0}) + l * z;
  }

  const BackgroundModel model = fit_background(pixels);
  CHECK(std::abs(model.mean()[0] - 5.0) < 0.05);
  CHECK(std::abs(model.mean()[1] - 5.0) < 0.05);
  CHECK(std::abs(model.covariance()(0, 0) - 1.0) < 0.05);
  CHECK(std::abs(model.covariance()(1, 1) - 1.0) < 0.05);
  CHECK(std::abs(model.covariance()(0, 1) - 0.5) < 0.05);
  CHECK(std::abs(model.covariance()(1, 0) - 0.5) < 0.05);
}

TEST_CASE("from_moments rejects asymmetric or misshapen covariances") {
  Eigen::MatrixXd asymmetric(2, 2);
  asymmetric << 1.0, 0.3, -0.3, 1.0;
  CHECK_THROWS_AS(background_from_moments(vec({0.0, 0.0}), asymmetric),
                  InputError);

  CHECK_THROWS_AS(
      background_from_moments(vec({0.0, 0.0, 0.0}), Eigen::MatrixXd::Identity(2, 2)),
      InputError);
}

TEST_CASE("whiten norms match hand-computed quadratic forms") {
  const BackgroundModel identity = identity_model(2);
  CHECK(identity.whiten(vec({3.0, 4.0})).norm() == doctest::Approx(5.0));
  CHECK(identity.whiten(identity.mean()).norm() == 0.0);

  const BackgroundModel reference = reference_model();
  const Eigen::VectorXd w = reference.whiten(vec({10.0, 3.0}));
  CHECK(w.squaredNorm() == doctest::Approx(52.0).epsilon(1e-12));

  CHECK_THROWS_AS(reference.whiten(vec({1.0})), InputError);
}

TEST_CASE("whitened norms agree with direct quadratic forms on random models") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 8);
    const Spectrum mean = random_spectrum(rng, d);
    const Eigen::MatrixXd cov = random_spd(rng, d);
    const BackgroundModel model = background_from_moments(mean, cov, 0.0);

    const Spectrum s = random_spectrum(rng, d);
    const double direct =
        (s - mean).dot(cov.inverse() * (s - mean));
    const double whitened = model.whiten(s).squaredNorm();
    CHECK(whitened ==
          doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("matched filter reproduces the axis-aligned and reference cases") {
  const BackgroundModel identity = identity_model(2);
  CHECK(matched_filter(identity, vec({1.0, 0.0}), vec({2.0, 0.0})) ==
        doctest::Approx(2.0));
  CHECK(matched_filter(identity, vec({1.0, 0.0}), identity.mean()) ==
        doctest::Approx(0.0));

  const BackgroundModel reference = reference_model();
  CHECK(matched_filter(reference, vec({10.0, 3.0}), vec({10.0, 3.0})) ==
        doctest::Approx(std::sqrt(52.0)).epsilon(1e-12));
}

TEST_CASE("matched filter rejects signatures at the mean") {
  const BackgroundModel reference = reference_model();
  CHECK_THROWS_AS(matched_filter(reference, reference.mean(), vec({1.0, 1.0})),
                  DegenerateSignatureError);
}

TEST_CASE("matched filter properties hold on random instances") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 8);
    const Spectrum mean = random_spectrum(rng, d);
    const Eigen::MatrixXd cov = random_spd(rng, d);
    const BackgroundModel model = background_from_moments(mean, cov, 0.0);

    Spectrum signature = random_spectrum(rng, d);
    if ((signature - mean).norm() < 1e-6) signature[0] += 1.0;
    const Spectrum pixel = random_spectrum(rng, d);
    const double response = matched_filter(model, signature, pixel);

    // Scale invariance in the signature offset.
    const double c = scale(rng);
    const Spectrum scaled = mean + c * (signature - mean);
    CHECK(matched_filter(model, scaled, pixel) ==
          doctest::Approx(response).epsilon(1e-9));

    // Linearity in the pixel offset.
    const double a = scale(rng);
    const Spectrum stretched = mean + a * (pixel - mean);
    CHECK(matched_filter(model, signature, stretched) ==
          doctest::Approx(a * response).epsilon(1e-9));

    // Self-response is the whitened norm.
    CHECK(matched_filter(model, signature, signature) ==
          doctest::Approx(model.whiten(signature).norm()).epsilon(1e-9));

    // Agreement with the explicit-inverse reference.
    CHECK(response ==
          doctest::Approx(naive_matched_filter(mean, cov, 0.0, signature,
                                               pixel))
              .epsilon(1e-9));
  }
}

TEST_CASE("vector-of-spectra overload matches the matrix overload") {
  std::vector<Spectrum> pixels = {vec({0.0, 0.0}), vec({2.0, 0.0}),
                                  vec({0.0, 2.0}), vec({2.0, 2.0})};
  const BackgroundModel model = fit_background(pixels, 0.0);
  CHECK(model.mean().isApprox(vec({1.0, 1.0})));

  pixels.push_back(vec({1.0, 2.0, 3.0}));
  CHECK_THROWS_AS(fit_background(pixels, 0.0), InputError);
}
