#include "misig/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "misig/errors.hpp"

namespace misig {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr char kMagic[6] = {'M', 'I', 'S', 'I', 'G', '1'};
constexpr std::size_t kHeaderBytes = 6 + 3 * 4;
constexpr std::uint64_t kMaxNativeValues = 1ull << 31;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw InputError("failed reading '" + path.string() + "'");
  }
  return std::move(buffer).str();
}

void write_atomic(const fs::path& path, const std::string& data) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw InputError("cannot open '" + tmp.string() + "' for writing");
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw InputError("failed writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw InputError("cannot rename '" + tmp.string() + "' to '" +
                     path.string() + "': " + ec.message());
  }
}

void append_u32(std::string& out, std::uint32_t value) {
  out.push_back(static_cast<char>(value & 0xff));
  out.push_back(static_cast<char>((value >> 8) & 0xff));
  out.push_back(static_cast<char>((value >> 16) & 0xff));
  out.push_back(static_cast<char>((value >> 24) & 0xff));
}

void append_f32(std::string& out, double value) {
  const float narrowed = static_cast<float>(value);
  std::uint32_t bits;
  std::memcpy(&bits, &narrowed, sizeof bits);
  append_u32(out, bits);
}

std::uint32_t read_u32(const std::string& data, std::size_t offset) {
  const auto byte = [&](std::size_t i) {
    return static_cast<std::uint32_t>(
        static_cast<unsigned char>(data[offset + i]));
  };
  return byte(0) | (byte(1) << 8) | (byte(2) << 16) | (byte(3) << 24);
}

double read_f32(const std::string& data, std::size_t offset) {
  const std::uint32_t bits = read_u32(data, offset);
  float value;
  std::memcpy(&value, &bits, sizeof value);
  return static_cast<double>(value);
}

bool has_magic(const std::string& data) {
  return data.size() >= sizeof kMagic &&
         std::memcmp(data.data(), kMagic, sizeof kMagic) == 0;
}

std::string encode_native(std::uint32_t rows, std::uint32_t cols,
                          std::uint32_t bands, const double* values) {
  const std::uint64_t count =
      static_cast<std::uint64_t>(rows) * cols * bands;
  std::string out;
  out.reserve(kHeaderBytes + 4 * count);
  out.append(kMagic, sizeof kMagic);
  append_u32(out, rows);
  append_u32(out, cols);
  append_u32(out, bands);
  for (std::uint64_t i = 0; i < count; ++i) append_f32(out, values[i]);
  return out;
}

struct NativeCube {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t bands = 0;
  Eigen::MatrixXd values;  // bands x (rows*cols), pixel per column
};

NativeCube decode_native(const std::string& data, const fs::path& path) {
  if (!has_magic(data)) {
    throw InputError("'" + path.string() + "' is not a native cube (bad magic)");
  }
  if (data.size() < kHeaderBytes) {
    throw InputError("'" + path.string() + "' is truncated before the header ends");
  }
  NativeCube cube;
  cube.rows = read_u32(data, 6);
  cube.cols = read_u32(data, 10);
  cube.bands = read_u32(data, 14);
  if (cube.rows == 0 || cube.cols == 0 || cube.bands == 0) {
    throw InputError("'" + path.string() + "' declares a zero dimension");
  }
  const std::uint64_t count =
      static_cast<std::uint64_t>(cube.rows) * cube.cols * cube.bands;
  if (count > kMaxNativeValues) {
    throw InputError("'" + path.string() + "' declares implausibly large dimensions");
  }
  const std::uint64_t expected = kHeaderBytes + 4 * count;
  if (data.size() != expected) {
    throw InputError("'" + path.string() + "': expected " +
                     std::to_string(expected) + " bytes, found " +
                     std::to_string(data.size()));
  }
  cube.values.resize(cube.bands,
                     static_cast<Eigen::Index>(cube.rows) * cube.cols);
  double* flat = cube.values.data();
  for (std::uint64_t i = 0; i < count; ++i) {
    flat[i] = read_f32(data, kHeaderBytes + 4 * i);
  }
  return cube;
}

double parse_cell(const std::string& token, const fs::path& path,
                  std::size_t line) {
  std::size_t begin = token.find_first_not_of(" \t");
  std::size_t end = token.find_last_not_of(" \t");
  if (begin == std::string::npos) {
    throw InputError("'" + path.string() + "' line " + std::to_string(line) +
                     ": empty value");
  }
  const std::string trimmed = token.substr(begin, end - begin + 1);
  errno = 0;
  char* parsed_end = nullptr;
  const double value = std::strtod(trimmed.c_str(), &parsed_end);
  if (parsed_end != trimmed.c_str() + trimmed.size() || errno == ERANGE) {
    throw InputError("'" + path.string() + "' line " + std::to_string(line) +
                     ": cannot parse '" + trimmed + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw InputError("'" + path.string() + "' line " + std::to_string(line) +
                     ": non-finite value");
  }
  return value;
}

Scene load_scene_csv(const std::string& text, const fs::path& path,
                     std::optional<std::pair<int, int>> extent) {
  std::vector<std::vector<double>> pixels;
  std::size_t width = 0;
  std::istringstream stream(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string token = line.substr(
          start, comma == std::string::npos ? std::string::npos
                                            : comma - start);
      row.push_back(parse_cell(token, path, line_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (width == 0) {
      width = row.size();
    } else if (row.size() != width) {
      throw InputError("'" + path.string() + "' line " +
                       std::to_string(line_no) + ": expected " +
                       std::to_string(width) + " values, found " +
                       std::to_string(row.size()));
    }
    pixels.push_back(std::move(row));
  }
  if (pixels.empty()) {
    throw InputError("'" + path.string() + "' contains no pixels");
  }

  Scene scene;
  if (extent) {
    const std::uint64_t expected =
        static_cast<std::uint64_t>(extent->first) * extent->second;
    if (expected != pixels.size()) {
      throw InputError("'" + path.string() + "' has " +
                       std::to_string(pixels.size()) +
                       " pixels, declared extent needs " +
                       std::to_string(expected));
    }
    scene.rows = extent->first;
    scene.cols = extent->second;
  } else {
    scene.rows = static_cast<int>(pixels.size());
    scene.cols = 1;
  }
  scene.pixels.resize(static_cast<Eigen::Index>(width),
                      static_cast<Eigen::Index>(pixels.size()));
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    for (std::size_t b = 0; b < width; ++b) {
      scene.pixels(static_cast<Eigen::Index>(b),
                   static_cast<Eigen::Index>(i)) = pixels[i][b];
    }
  }
  return scene;
}

Scene scene_from_cube(NativeCube cube, const fs::path& path) {
  if (!cube.values.allFinite()) {
    throw InputError("'" + path.string() + "' contains non-finite values");
  }
  Scene scene;
  scene.rows = static_cast<int>(cube.rows);
  scene.cols = static_cast<int>(cube.cols);
  scene.pixels = std::move(cube.values);
  return scene;
}

Scene load_scene_impl(const fs::path& path,
                      std::optional<std::pair<int, int>> extent) {
  const std::string data = read_file(path);
  if (has_magic(data)) {
    Scene scene = scene_from_cube(decode_native(data, path), path);
    if (extent && (scene.rows != extent->first || scene.cols != extent->second)) {
      throw InputError("'" + path.string() + "' is " +
                       std::to_string(scene.rows) + "x" +
                       std::to_string(scene.cols) +
                       ", which contradicts the declared extent");
    }
    return scene;
  }
  return load_scene_csv(data, path, extent);
}

// Single-band cube shared by maps, truths, and grid fields.
Eigen::VectorXd load_plane(const fs::path& path, int& rows, int& cols) {
  const NativeCube cube = decode_native(read_file(path), path);
  if (cube.bands != 1) {
    throw InputError("'" + path.string() + "' has " +
                     std::to_string(cube.bands) + " bands, expected 1");
  }
  rows = static_cast<int>(cube.rows);
  cols = static_cast<int>(cube.cols);
  return cube.values.row(0).transpose();
}

void check_extent(int rows, int cols, Eigen::Index pixel_count) {
  if (rows < 1 || cols < 1 ||
      static_cast<std::uint64_t>(rows) * cols !=
          static_cast<std::uint64_t>(pixel_count)) {
    throw InputError("extent does not match the pixel count");
  }
  if (static_cast<std::uint64_t>(rows) >
          std::numeric_limits<std::uint32_t>::max() ||
      static_cast<std::uint64_t>(cols) >
          std::numeric_limits<std::uint32_t>::max()) {
    throw InputError("extent exceeds the native format limits");
  }
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw InputError("'" + path.string() + "' is not valid JSON");
  }
  return doc;
}

void require_keys(const json& object, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw InputError(where + ": unknown key '" + it.key() + "'");
    }
  }
}

double as_double(const json& value, const std::string& where) {
  if (!value.is_number()) throw InputError(where + " must be a number");
  return value.get<double>();
}

int as_int(const json& value, const std::string& where) {
  if (!value.is_number_integer()) {
    throw InputError(where + " must be an integer");
  }
  return value.get<int>();
}

std::uint64_t as_seed(const json& value, const std::string& where) {
  if (!value.is_number_unsigned()) {
    throw InputError(where + " must be a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

std::string as_string(const json& value, const std::string& where) {
  if (!value.is_string()) throw InputError(where + " must be a string");
  return value.get<std::string>();
}

Spectrum as_spectrum(const json& value, const std::string& where) {
  if (!value.is_array() || value.empty()) {
    throw InputError(where + " must be a non-empty array of numbers");
  }
  Spectrum s(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    s[static_cast<Eigen::Index>(i)] =
        as_double(value[i], where + "[" + std::to_string(i) + "]");
  }
  if (!s.allFinite()) throw InputError(where + " has non-finite values");
  return s;
}

std::vector<double> to_vector(const Spectrum& s) {
  return std::vector<double>(s.data(), s.data() + s.size());
}

}  // namespace

Scene load_scene(const fs::path& path) { return load_scene_impl(path, {}); }

Scene load_scene(const fs::path& path, int rows, int cols) {
  if (rows < 1 || cols < 1) throw InputError("extent must be positive");
  return load_scene_impl(path, std::pair<int, int>{rows, cols});
}

void save_scene(const fs::path& path, const Scene& scene) {
  check_extent(scene.rows, scene.cols, scene.pixel_count());
  if (scene.bands() < 1) throw InputError("scene has no bands");
  if (!scene.pixels.allFinite()) {
    throw InputError("scene contains non-finite values");
  }
  write_atomic(path,
               encode_native(static_cast<std::uint32_t>(scene.rows),
                             static_cast<std::uint32_t>(scene.cols),
                             static_cast<std::uint32_t>(scene.bands()),
                             scene.pixels.data()));
}

DetectionMap load_map(const fs::path& path) {
  DetectionMap map;
  map.scores = load_plane(path, map.rows, map.cols);
  if (!map.scores.allFinite()) {
    throw InputError("'" + path.string() + "' contains non-finite scores");
  }
  return map;
}

void save_map(const fs::path& path, const DetectionMap& map) {
  check_extent(map.rows, map.cols, map.scores.size());
  if (!map.scores.allFinite()) {
    throw InputError("detection map contains non-finite scores");
  }
  write_atomic(path, encode_native(static_cast<std::uint32_t>(map.rows),
                                   static_cast<std::uint32_t>(map.cols), 1,
                                   map.scores.data()));
}

GroundTruth load_truth(const fs::path& path) {
  GroundTruth truth;
  truth.abundance = load_plane(path, truth.rows, truth.cols);
  if (!truth.abundance.allFinite() || truth.abundance.minCoeff() < 0.0 ||
      truth.abundance.maxCoeff() > 1.0) {
    throw InputError("'" + path.string() + "' has abundances outside [0, 1]");
  }
  return truth;
}

void save_truth(const fs::path& path, const GroundTruth& truth) {
  check_extent(truth.rows, truth.cols, truth.abundance.size());
  if (!truth.abundance.allFinite() || truth.abundance.minCoeff() < 0.0 ||
      truth.abundance.maxCoeff() > 1.0) {
    throw InputError("abundances must lie in [0, 1]");
  }
  write_atomic(path, encode_native(static_cast<std::uint32_t>(truth.rows),
                                   static_cast<std::uint32_t>(truth.cols), 1,
                                   truth.abundance.data()));
}

BagSet load_bags(const fs::path& path, const Scene& scene) {
  const json doc = parse_json_file(path);
  const std::string where = "'" + path.string() + "'";
  if (!doc.is_object() || !doc.contains("bags") || !doc["bags"].is_array()) {
    throw InputError(where + " must be an object with a 'bags' array");
  }
  require_keys(doc, where, {"bags"});

  BagSet bags;
  std::vector<int> claims(static_cast<std::size_t>(scene.pixel_count()), 0);
  for (const json& entry : doc["bags"]) {
    const std::string bag_where = where + " bag " +
                                  std::to_string(bags.positive.size() +
                                                 bags.negative.size());
    if (!entry.is_object()) throw InputError(bag_where + " must be an object");
    require_keys(entry, bag_where, {"id", "label", "region", "pixels"});
    if (!entry.contains("id") || !entry.contains("label")) {
      throw InputError(bag_where + " needs 'id' and 'label'");
    }

    Bag bag;
    bag.id = as_string(entry["id"], bag_where + " id");
    if (bag.id.empty()) throw InputError(bag_where + " id is empty");
    const std::string label = as_string(entry["label"], bag_where + " label");
    if (label == "positive") {
      bag.label = BagLabel::positive;
    } else if (label == "negative") {
      bag.label = BagLabel::negative;
    } else {
      throw InputError(bag_where + ": label must be 'positive' or 'negative'");
    }

    std::vector<Eigen::Index> indices;
    if (entry.contains("region") == entry.contains("pixels")) {
      throw InputError(bag_where + " needs exactly one of 'region' or 'pixels'");
    }
    if (entry.contains("region")) {
      const json& region = entry["region"];
      const std::string region_where = bag_where + " region";
      if (!region.is_object()) throw InputError(region_where + " must be an object");
      require_keys(region, region_where, {"row0", "col0", "row1", "col1"});
      for (const char* key : {"row0", "col0", "row1", "col1"}) {
        if (!region.contains(key)) {
          throw InputError(region_where + " needs '" + key + "'");
        }
      }
      const int row0 = as_int(region["row0"], region_where + " row0");
      const int col0 = as_int(region["col0"], region_where + " col0");
      const int row1 = as_int(region["row1"], region_where + " row1");
      const int col1 = as_int(region["col1"], region_where + " col1");
      if (row0 < 0 || col0 < 0 || row0 > row1 || col0 > col1 ||
          row1 >= scene.rows || col1 >= scene.cols) {
        throw InputError(region_where + " is outside the scene extent");
      }
      for (int r = row0; r <= row1; ++r) {
        for (int c = col0; c <= col1; ++c) {
          indices.push_back(scene.index(r, c));
        }
      }
    } else {
      const json& list = entry["pixels"];
      const std::string list_where = bag_where + " pixels";
      if (!list.is_array() || list.empty()) {
        throw InputError(list_where + " must be a non-empty array");
      }
      for (const json& item : list) {
        if (!item.is_array() || item.size() != 2) {
          throw InputError(list_where + " entries must be [row, col] pairs");
        }
        const int r = as_int(item[0], list_where + " row");
        const int c = as_int(item[1], list_where + " col");
        if (r < 0 || r >= scene.rows || c < 0 || c >= scene.cols) {
          throw InputError(list_where + " entry (" + std::to_string(r) + ", " +
                           std::to_string(c) + ") is outside the scene");
        }
        indices.push_back(scene.index(r, c));
      }
    }

    for (Eigen::Index i : indices) {
      ++claims[static_cast<std::size_t>(i)];
      Pixel pixel;
      pixel.spectrum = scene.pixels.col(i);
      pixel.location = PixelLocation{static_cast<int>(i / scene.cols),
                                     static_cast<int>(i % scene.cols)};
      bag.pixels.push_back(std::move(pixel));
    }
    (bag.label == BagLabel::positive ? bags.positive : bags.negative)
        .push_back(std::move(bag));
  }

  std::size_t shared = 0;
  for (int count : claims) {
    if (count > 1) ++shared;
  }
  if (shared > 0) {
    std::cerr << "warning: " << shared << " pixel(s) appear in multiple bags\n";
  }

  const ValidationReport report = validate(bags);
  if (!report.valid()) {
    const ValidationIssue& issue = report.issues.front();
    throw InputError(where + ": " +
                     (issue.bag_id.empty() ? "" : "bag '" + issue.bag_id + "': ") +
                     issue.message);
  }
  return bags;
}

void save_bags(const fs::path& path, const BagSet& bags) {
  json entries = json::array();
  for (const auto* list : {&bags.positive, &bags.negative}) {
    for (const Bag& bag : *list) {
      json pixels = json::array();
      for (const Pixel& pixel : bag.pixels) {
        if (!pixel.location) {
          throw InputError("bag '" + bag.id +
                           "' has pixels without locations; cannot save");
        }
        pixels.push_back({pixel.location->row, pixel.location->col});
      }
      entries.push_back({{"id", bag.id},
                         {"label", bag.label == BagLabel::positive
                                       ? "positive"
                                       : "negative"},
                         {"pixels", std::move(pixels)}});
    }
  }
  const json doc = {{"bags", std::move(entries)}};
  write_atomic(path, doc.dump(2) + "\n");
}

void save_estimation_result(const fs::path& path,
                            const EstimationResult& result) {
  json doc;
  doc["best_objective"] = result.best_objective;
  doc["best_signature"] = to_vector(result.best_signature);
  doc["evaluations"] = result.evaluations;
  doc["trace"] = result.trace;
  write_atomic(path, doc.dump(2) + "\n");
}

EstimationResult load_estimation_result(const fs::path& path) {
  const json doc = parse_json_file(path);
  const std::string where = "'" + path.string() + "'";
  if (!doc.is_object()) throw InputError(where + " must be an object");
  require_keys(doc, where,
               {"best_objective", "best_signature", "evaluations", "trace"});
  for (const char* key :
       {"best_objective", "best_signature", "evaluations", "trace"}) {
    if (!doc.contains(key)) {
      throw InputError(where + " is missing '" + key + "'");
    }
  }

  EstimationResult result;
  result.best_objective =
      as_double(doc["best_objective"], where + " best_objective");
  result.best_signature =
      as_spectrum(doc["best_signature"], where + " best_signature");
  result.evaluations = as_seed(doc["evaluations"], where + " evaluations");
  if (!doc["trace"].is_array() || doc["trace"].empty()) {
    throw InputError(where + " trace must be a non-empty array");
  }
  for (const json& entry : doc["trace"]) {
    // Degenerate starting points serialize as null (-infinity).
    result.trace.push_back(
        entry.is_null() ? -std::numeric_limits<double>::infinity()
                        : as_double(entry, where + " trace entry"));
  }
  return result;
}

Spectrum load_signature(const fs::path& path) {
  const json doc = parse_json_file(path);
  const std::string where = "'" + path.string() + "'";
  if (doc.is_array()) return as_spectrum(doc, where);
  if (doc.is_object() && doc.contains("best_signature")) {
    return as_spectrum(doc["best_signature"], where + " best_signature");
  }
  throw InputError(where +
                   " must be a JSON array or an estimation result document");
}

void save_roc_csv(const fs::path& path, const RocCurve& curve) {
  std::string out = "threshold,far,pd\n";
  char row[128];
  for (const RocPoint& point : curve.points) {
    std::snprintf(row, sizeof row, "%.17g,%.17g,%.17g\n", point.threshold,
                  point.far, point.pd);
    out += row;
  }
  write_atomic(path, out);
}

void save_grid_field(const fs::path& path, const GridSearchResult& result) {
  if (result.n0 < 1 || result.n1 < 1 ||
      result.values.size() != result.n0 * result.n1) {
    throw InputError("grid result shape is inconsistent");
  }
  write_atomic(path, encode_native(static_cast<std::uint32_t>(result.n0),
                                   static_cast<std::uint32_t>(result.n1), 1,
                                   result.values.data()));
}

void save_grid_summary(const fs::path& path, const GridSearchResult& result) {
  json doc;
  doc["argmax"] = to_vector(result.argmax);
  doc["argmax_value"] = result.argmax_value;
  doc["bounds"] = {{result.bounds[0].lo, result.bounds[0].hi},
                   {result.bounds[1].lo, result.bounds[1].hi}};
  doc["step"] = result.step;
  doc["shape"] = {result.n0, result.n1};
  write_atomic(path, doc.dump(2) + "\n");
}

Scene band_average(const Scene& scene, int factor) {
  if (factor < 1) throw InputError("factor must be at least 1");
  if (factor == 1) return scene;

  const Eigen::Index d = scene.bands();
  const Eigen::Index groups = std::max<Eigen::Index>(d / factor, 1);

  Scene out;
  out.rows = scene.rows;
  out.cols = scene.cols;
  out.pixels.resize(groups, scene.pixel_count());
  for (Eigen::Index g = 0; g < groups; ++g) {
    const Eigen::Index begin = g * factor;
    const Eigen::Index end = g + 1 == groups ? d : begin + factor;
    out.pixels.row(g) =
        scene.pixels.middleRows(begin, end - begin).colwise().mean();
  }
  return out;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.synth = default_synthetic_config();
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  RunConfig cfg = default_run_config();
  const json doc = parse_json_file(path);
  const std::string where = "'" + path.string() + "'";
  if (!doc.is_object()) throw InputError(where + " must be an object");
  require_keys(doc, where,
               {"synth", "ea", "objective", "background", "roc",
                "band_average_factor", "paths"});

  if (doc.contains("synth")) {
    const json& synth = doc["synth"];
    const std::string synth_where = where + " synth";
    if (!synth.is_object()) throw InputError(synth_where + " must be an object");
    require_keys(synth, synth_where,
                 {"rows", "cols", "bg_mean", "bg_cov", "target",
                  "target_locations", "proportion_range", "n_pos_bags",
                  "pos_bag_size", "n_neg_bags", "neg_bag_size", "seed"});
    if (synth.contains("rows")) {
      cfg.synth.rows = as_int(synth["rows"], synth_where + " rows");
    }
    if (synth.contains("cols")) {
      cfg.synth.cols = as_int(synth["cols"], synth_where + " cols");
    }
    if (synth.contains("bg_mean")) {
      cfg.synth.bg_mean = as_spectrum(synth["bg_mean"], synth_where + " bg_mean");
    }
    if (synth.contains("bg_cov")) {
      const json& cov = synth["bg_cov"];
      const std::string cov_where = synth_where + " bg_cov";
      if (!cov.is_array() || cov.empty()) {
        throw InputError(cov_where + " must be an array of rows");
      }
      const Eigen::Index d = static_cast<Eigen::Index>(cov.size());
      cfg.synth.bg_cov.resize(d, d);
      for (Eigen::Index r = 0; r < d; ++r) {
        const Spectrum row = as_spectrum(
            cov[static_cast<std::size_t>(r)],
            cov_where + " row " + std::to_string(r));
        if (row.size() != d) throw InputError(cov_where + " must be square");
        cfg.synth.bg_cov.row(r) = row;
      }
    }
    if (synth.contains("target")) {
      cfg.synth.target = as_spectrum(synth["target"], synth_where + " target");
    }
    if (synth.contains("target_locations")) {
      const json& locations = synth["target_locations"];
      if (locations.is_null()) {
        cfg.synth.target_locations.reset();
      } else if (locations.is_array()) {
        std::vector<PixelLocation> parsed;
        for (const json& item : locations) {
          if (!item.is_array() || item.size() != 2) {
            throw InputError(synth_where +
                             " target_locations entries must be [row, col]");
          }
          parsed.push_back(
              {as_int(item[0], synth_where + " target_locations row"),
               as_int(item[1], synth_where + " target_locations col")});
        }
        cfg.synth.target_locations = std::move(parsed);
      } else {
        throw InputError(synth_where +
                         " target_locations must be null or an array");
      }
    }
    if (synth.contains("proportion_range")) {
      const json& range = synth["proportion_range"];
      if (!range.is_array() || range.size() != 2) {
        throw InputError(synth_where + " proportion_range must be [lo, hi]");
      }
      cfg.synth.proportion_lo =
          as_double(range[0], synth_where + " proportion lo");
      cfg.synth.proportion_hi =
          as_double(range[1], synth_where + " proportion hi");
    }
    if (synth.contains("n_pos_bags")) {
      cfg.synth.n_pos_bags = as_int(synth["n_pos_bags"], synth_where + " n_pos_bags");
    }
    if (synth.contains("pos_bag_size")) {
      cfg.synth.pos_bag_size =
          as_int(synth["pos_bag_size"], synth_where + " pos_bag_size");
    }
    if (synth.contains("n_neg_bags")) {
      cfg.synth.n_neg_bags = as_int(synth["n_neg_bags"], synth_where + " n_neg_bags");
    }
    if (synth.contains("neg_bag_size")) {
      cfg.synth.neg_bag_size =
          as_int(synth["neg_bag_size"], synth_where + " neg_bag_size");
    }
    if (synth.contains("seed")) {
      cfg.synth.seed = as_seed(synth["seed"], synth_where + " seed");
    }
    if (cfg.synth.rows < 1 || cfg.synth.cols < 1) {
      throw InputError(synth_where + ": extent must be positive");
    }
    if (!(cfg.synth.proportion_lo > 0.0 &&
          cfg.synth.proportion_lo <= cfg.synth.proportion_hi &&
          cfg.synth.proportion_hi <= 1.0)) {
      throw InputError(synth_where +
                       ": proportion_range must satisfy 0 < lo <= hi <= 1");
    }
    if (cfg.synth.n_pos_bags < 1 || cfg.synth.pos_bag_size < 1 ||
        cfg.synth.n_neg_bags < 1 || cfg.synth.neg_bag_size < 1) {
      throw InputError(synth_where + ": bag counts and sizes must be positive");
    }
  }

  if (doc.contains("ea")) {
    const json& ea = doc["ea"];
    const std::string ea_where = where + " ea";
    if (!ea.is_object()) throw InputError(ea_where + " must be an object");
    require_keys(ea, ea_where,
                 {"population_size", "iterations", "seed", "mutation",
                  "custom_init", "plateau_iterations"});
    if (ea.contains("population_size")) {
      cfg.ea.population_size =
          as_int(ea["population_size"], ea_where + " population_size");
      if (cfg.ea.population_size < 2) {
        throw InputError(ea_where + ": population_size must be at least 2");
      }
    }
    if (ea.contains("iterations")) {
      cfg.ea.iterations = as_int(ea["iterations"], ea_where + " iterations");
      if (cfg.ea.iterations < 1) {
        throw InputError(ea_where + ": iterations must be at least 1");
      }
    }
    if (ea.contains("seed")) {
      cfg.ea.seed = as_seed(ea["seed"], ea_where + " seed");
    }
    if (ea.contains("mutation")) {
      const json& mutation = ea["mutation"];
      const std::string mut_where = ea_where + " mutation";
      if (!mutation.is_object()) {
        throw InputError(mut_where + " must be an object");
      }
      require_keys(mutation, mut_where,
                   {"narrow_weight", "narrow_sigma", "wide_sigma"});
      for (const char* key : {"narrow_weight", "narrow_sigma", "wide_sigma"}) {
        if (!mutation.contains(key)) {
          throw InputError(mut_where + " needs '" + key + "'");
        }
      }
      MutationParams params;
      params.narrow_weight =
          as_double(mutation["narrow_weight"], mut_where + " narrow_weight");
      params.narrow_sigma =
          as_double(mutation["narrow_sigma"], mut_where + " narrow_sigma");
      params.wide_sigma =
          as_double(mutation["wide_sigma"], mut_where + " wide_sigma");
      if (!(params.narrow_weight >= 0.0 && params.narrow_weight <= 1.0) ||
          !(params.narrow_sigma > 0.0) ||
          !(params.wide_sigma > params.narrow_sigma)) {
        throw InputError(mut_where + " is out of range");
      }
      cfg.ea.mutation = params;
    }
    if (ea.contains("custom_init")) {
      const json& init = ea["custom_init"];
      if (!init.is_array()) {
        throw InputError(ea_where + " custom_init must be an array");
      }
      for (std::size_t i = 0; i < init.size(); ++i) {
        cfg.ea.custom_init.push_back(as_spectrum(
            init[i], ea_where + " custom_init[" + std::to_string(i) + "]"));
      }
    }
    if (ea.contains("plateau_iterations")) {
      const int plateau =
          as_int(ea["plateau_iterations"], ea_where + " plateau_iterations");
      if (plateau < 1) {
        throw InputError(ea_where + ": plateau_iterations must be at least 1");
      }
      cfg.ea.plateau_iterations = plateau;
    }
  }

  if (doc.contains("objective")) {
    const json& objective = doc["objective"];
    const std::string obj_where = where + " objective";
    if (!objective.is_object()) {
      throw InputError(obj_where + " must be an object");
    }
    require_keys(objective, obj_where, {"alpha", "beta"});
    if (objective.contains("alpha") && !objective["alpha"].is_null()) {
      cfg.objective.alpha = as_double(objective["alpha"], obj_where + " alpha");
    }
    if (objective.contains("beta") && !objective["beta"].is_null()) {
      cfg.objective.beta = as_double(objective["beta"], obj_where + " beta");
    }
  }

  if (doc.contains("background")) {
    const json& background = doc["background"];
    const std::string bg_where = where + " background";
    if (!background.is_object()) {
      throw InputError(bg_where + " must be an object");
    }
    require_keys(background, bg_where, {"regularization", "fit"});
    if (background.contains("regularization") &&
        !background["regularization"].is_null()) {
      const double eps =
          as_double(background["regularization"], bg_where + " regularization");
      if (!(eps >= 0.0)) {
        throw InputError(bg_where + ": regularization must be non-negative");
      }
      cfg.background_regularization = eps;
    }
    if (background.contains("fit")) {
      const std::string fit = as_string(background["fit"], bg_where + " fit");
      if (fit == "scene") {
        cfg.fit_from_negative_bags = false;
      } else if (fit == "negative-bags") {
        cfg.fit_from_negative_bags = true;
      } else {
        throw InputError(bg_where + ": fit must be 'scene' or 'negative-bags'");
      }
    }
  }

  if (doc.contains("roc")) {
    const json& roc = doc["roc"];
    const std::string roc_where = where + " roc";
    if (!roc.is_object()) throw InputError(roc_where + " must be an object");
    require_keys(roc, roc_where, {"area_per_pixel", "max_far", "halo_radius"});
    if (roc.contains("area_per_pixel")) {
      cfg.area_per_pixel =
          as_double(roc["area_per_pixel"], roc_where + " area_per_pixel");
      if (!(cfg.area_per_pixel > 0.0)) {
        throw InputError(roc_where + ": area_per_pixel must be positive");
      }
    }
    if (roc.contains("max_far")) {
      cfg.max_far = as_double(roc["max_far"], roc_where + " max_far");
      if (!(cfg.max_far > 0.0)) {
        throw InputError(roc_where + ": max_far must be positive");
      }
    }
    if (roc.contains("halo_radius")) {
      cfg.halo_radius = as_int(roc["halo_radius"], roc_where + " halo_radius");
      if (cfg.halo_radius < 0) {
        throw InputError(roc_where + ": halo_radius must be non-negative");
      }
    }
  }

  if (doc.contains("band_average_factor")) {
    cfg.band_average_factor =
        as_int(doc["band_average_factor"], where + " band_average_factor");
    if (cfg.band_average_factor < 1) {
      throw InputError(where + ": band_average_factor must be at least 1");
    }
  }

  if (doc.contains("paths")) {
    const json& paths = doc["paths"];
    const std::string paths_where = where + " paths";
    if (!paths.is_object()) throw InputError(paths_where + " must be an object");
    require_keys(paths, paths_where, {"scene", "bags", "truth", "output"});
    if (paths.contains("scene")) {
      cfg.scene_path = as_string(paths["scene"], paths_where + " scene");
    }
    if (paths.contains("bags")) {
      cfg.bags_path = as_string(paths["bags"], paths_where + " bags");
    }
    if (paths.contains("truth")) {
      cfg.truth_path = as_string(paths["truth"], paths_where + " truth");
    }
    if (paths.contains("output")) {
      cfg.output_path = as_string(paths["output"], paths_where + " output");
    }
    for (const std::string* input :
         {&cfg.scene_path, &cfg.bags_path, &cfg.truth_path}) {
      if (!input->empty() && !fs::exists(*input)) {
        throw InputError(paths_where + ": '" + *input + "' does not exist");
      }
    }
  }

  return cfg;
}

}  // namespace misig
