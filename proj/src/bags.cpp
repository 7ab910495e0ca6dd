#include "misig/bags.hpp"

#include <set>
#include <string>

namespace misig {

namespace {

const Pixel* first_pixel(const BagSet& bags) {
  for (const auto* list : {&bags.positive, &bags.negative}) {
    for (const auto& bag : *list) {
      if (!bag.pixels.empty()) return &bag.pixels.front();
    }
  }
  return nullptr;
}

void check_bag(const Bag& bag, BagLabel expected, Eigen::Index bands,
               ValidationReport& report) {
  if (bag.label != expected) {
    report.issues.push_back({bag.id, "label does not match its list"});
  }
  if (bag.pixels.empty()) {
    report.issues.push_back({bag.id, "bag has no pixels"});
    return;
  }
  for (std::size_t i = 0; i < bag.pixels.size(); ++i) {
    const Spectrum& s = bag.pixels[i].spectrum;
    if (s.size() != bands) {
      report.issues.push_back(
          {bag.id, "pixel " + std::to_string(i) + " has " +
                       std::to_string(s.size()) + " bands, expected " +
                       std::to_string(bands)});
    } else if (!s.allFinite()) {
      report.issues.push_back(
          {bag.id, "pixel " + std::to_string(i) + " has a non-finite value"});
    }
  }
}

}  // namespace

Eigen::Index BagSet::bands() const {
  const Pixel* p = first_pixel(*this);
  return p ? p->spectrum.size() : 0;
}

std::size_t BagSet::total_positive_pixels() const {
  std::size_t n = 0;
  for (const auto& bag : positive) n += bag.pixels.size();
  return n;
}

std::size_t BagSet::total_pixels() const {
  std::size_t n = total_positive_pixels();
  for (const auto& bag : negative) n += bag.pixels.size();
  return n;
}

ValidationReport validate(const BagSet& bags) {
  ValidationReport report;
  if (bags.positive.empty()) {
    report.issues.push_back({"", "no positive bags"});
  }

  const Pixel* first = first_pixel(bags);
  const Eigen::Index bands = first ? first->spectrum.size() : 0;
  if (first && bands == 0) {
    report.issues.push_back({"", "pixels have zero bands"});
  }

  std::set<std::string> ids;
  for (const auto* list : {&bags.positive, &bags.negative}) {
    const BagLabel expected =
        list == &bags.positive ? BagLabel::positive : BagLabel::negative;
    for (const auto& bag : *list) {
      if (!ids.insert(bag.id).second) {
        report.issues.push_back({bag.id, "duplicate bag id"});
      }
      check_bag(bag, expected, bands, report);
    }
  }
  return report;
}

}  // namespace misig
