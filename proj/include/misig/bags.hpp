#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace misig {

using Spectrum = Eigen::VectorXd;

struct PixelLocation {
  int row = 0;
  int col = 0;

  bool operator==(const PixelLocation&) const = default;
};

struct Pixel {
  Spectrum spectrum;
  std::optional<PixelLocation> location;
};

enum class BagLabel { positive, negative };

// A labeled set of pixels.  A positive bag promises at least one pixel with
// target content; a negative bag promises none.
struct Bag {
  std::string id;
  BagLabel label = BagLabel::positive;
  std::vector<Pixel> pixels;
};

struct BagSet {
  std::vector<Bag> positive;
  std::vector<Bag> negative;

  // Band count taken from the first pixel found; 0 when the set is empty.
  Eigen::Index bands() const;
  std::size_t total_positive_pixels() const;
  std::size_t total_pixels() const;
};

struct ValidationIssue {
  std::string bag_id;  // empty when the issue concerns the set as a whole
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool valid() const { return issues.empty(); }
};

// Checks structural health: at least one positive bag, no empty bags, uniform
// band count, finite spectra, labels consistent with list membership, and
// unique bag ids.  Never throws; every problem becomes an issue.
ValidationReport validate(const BagSet& bags);

}  // namespace misig
