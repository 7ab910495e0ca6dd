#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "misig/bags.hpp"
#include "support.hpp"

using namespace misig;
using testsupport::make_bag;
using testsupport::vec;

namespace {

bool mentions(const ValidationReport& report, const std::string& bag_id,
              const std::string& fragment) {
  for (const ValidationIssue& issue : report.issues) {
    if (issue.bag_id == bag_id &&
        issue.message.find(fragment) != std::string::npos) {
      return true;
    }
  }
  return false;
}

}  // namespace

TEST_CASE("well-formed bag set validates cleanly") {
  BagSet bags;
  bags.positive.push_back(
      make_bag("p1", BagLabel::positive, {vec({1.0, 2.0}), vec({3.0, 4.0})}));
  bags.negative.push_back(make_bag("n1", BagLabel::negative, {vec({0.0, 0.0})}));

  const ValidationReport report = validate(bags);
  CHECK(report.valid());
  CHECK(report.issues.empty());

  CHECK(bags.bands() == 2);
  CHECK(bags.total_positive_pixels() == 2);
  CHECK(bags.total_pixels() == 3);
}

TEST_CASE("dimension mismatch is reported against the offending bag") {
  BagSet bags;
  bags.positive.push_back(
      make_bag("ragged", BagLabel::positive,
               {vec({1.0, 2.0}), vec({1.0, 2.0, 3.0})}));

  const ValidationReport report = validate(bags);
  CHECK_FALSE(report.valid());
  CHECK(mentions(report, "ragged", "bands"));
}

TEST_CASE("missing positive bags are reported") {
  BagSet bags;
  bags.negative.push_back(make_bag("n1", BagLabel::negative, {vec({1.0})}));

  const ValidationReport report = validate(bags);
  CHECK_FALSE(report.valid());
  CHECK(mentions(report, "", "no positive bags"));
}

TEST_CASE("empty bags, non-finite pixels, duplicate ids, and label drift") {
  BagSet bags;
  bags.positive.push_back(make_bag("p1", BagLabel::positive, {vec({1.0})}));
  bags.positive.push_back(make_bag("empty", BagLabel::positive, {}));
  bags.positive.push_back(make_bag(
      "p1", BagLabel::positive,
      {vec({std::numeric_limits<double>::quiet_NaN()})}));
  Bag mislabeled = make_bag("drift", BagLabel::positive, {vec({2.0})});
  bags.negative.push_back(mislabeled);

  const ValidationReport report = validate(bags);
  CHECK_FALSE(report.valid());
  CHECK(mentions(report, "empty", "no pixels"));
  CHECK(mentions(report, "p1", "non-finite"));
  CHECK(mentions(report, "p1", "duplicate"));
  CHECK(mentions(report, "drift", "label"));
}

TEST_CASE("bands falls back across lists and empty sets") {
  BagSet empty;
  CHECK(empty.bands() == 0);
  CHECK(empty.total_pixels() == 0);

  BagSet negative_only;
  negative_only.negative.push_back(
      make_bag("n1", BagLabel::negative, {vec({1.0, 2.0, 3.0})}));
  CHECK(negative_only.bands() == 3);
}

TEST_CASE("pixel locations are optional") {
  Pixel bare;
  bare.spectrum = vec({1.0});
  CHECK_FALSE(bare.location.has_value());

  Pixel placed;
  placed.spectrum = vec({1.0});
  placed.location = PixelLocation{3, 7};
  REQUIRE(placed.location.has_value());
  CHECK(placed.location->row == 3);
  CHECK(placed.location->col == 7);
}
