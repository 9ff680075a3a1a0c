#include "tdamal/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

#include <json.hpp>

#include "tdamal/error.hpp"
#include "tdamal/text.hpp"

namespace tdamal::dataio {

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out;
  out.features = features.select_rows(rows);
  out.labels.reserve(rows.size());
  for (auto r : rows) out.labels.push_back(labels[r]);
  out.class_names = class_names;
  out.feature_names = feature_names;
  out.label_column = label_column;
  return out;
}

Dataset Dataset::with_features(Matrix f, std::vector<std::string> names) const {
  require(f.rows() == labels.size(), "feature block row count does not match labels");
  Dataset out;
  out.features = std::move(f);
  out.labels = labels;
  out.class_names = class_names;
  out.feature_names = std::move(names);
  out.label_column = label_column;
  return out;
}

void Dataset::validate() const {
  require(features.rows() == labels.size(), "dataset: row count differs from label count");
  require(feature_names.size() == features.cols(), "dataset: feature name count differs from column count");
  for (int l : labels)
    require(l >= 0 && static_cast<std::size_t>(l) < class_names.size(), "dataset: label id out of range");
}

Dataset parse_dataset(std::string_view csv_text, std::string_view label_column) {
  const CsvTable table = parse_csv(csv_text);
  if (table.empty()) fail(ErrorCode::parse, "empty file");
  const auto& header = table.front();
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end())
    fail(ErrorCode::not_found, "missing label column: " + std::string(label_column));
  const auto label_idx = static_cast<std::size_t>(label_it - header.begin());
  if (table.size() < 2) fail(ErrorCode::parse, "empty file: header without data rows");

  Dataset d;
  d.label_column = std::string(label_column);
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_idx) d.feature_names.push_back(header[c]);

  const std::size_t n = table.size() - 1;
  d.features = Matrix(n, d.feature_names.size());
  std::vector<std::string> raw_labels(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& rec = table[r + 1];
    if (rec.size() != header.size())
      fail(ErrorCode::parse, "row " + std::to_string(r + 1) + " has " + std::to_string(rec.size()) +
                                 " fields, header has " + std::to_string(header.size()));
    std::size_t out_c = 0;
    for (std::size_t c = 0; c < rec.size(); ++c) {
      if (c == label_idx) {
        raw_labels[r] = rec[c];
        continue;
      }
      const auto v = parse_real(rec[c]);
      if (!v || std::isnan(*v))
        fail(ErrorCode::parse, "non-numeric feature at row " + std::to_string(r + 1) + ", column '" +
                                   header[c] + "': '" + rec[c] + "'");
      d.features(r, out_c++) = *v;
    }
  }

  std::vector<std::string> distinct = raw_labels;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::map<std::string, int> code;
  for (std::size_t i = 0; i < distinct.size(); ++i) code[distinct[i]] = static_cast<int>(i);
  d.class_names = distinct;
  d.labels.reserve(n);
  for (const auto& s : raw_labels) d.labels.push_back(code[s]);
  return d;
}

Dataset load_csv(const std::filesystem::path& path, std::string_view label_column) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::io, "missing file: " + path.string());
  return parse_dataset(read_file(path), label_column);
}

Matrix parse_numeric_table(std::string_view csv_text) {
  CsvTable table = parse_csv(csv_text);
  if (table.empty()) fail(ErrorCode::parse, "empty file");
  const bool header = std::any_of(table.front().begin(), table.front().end(),
                                  [](const std::string& s) { return !parse_real(s).has_value(); });
  const std::size_t first = header ? 1 : 0;
  if (table.size() <= first) fail(ErrorCode::parse, "empty file: no numeric rows");
  const std::size_t cols = table[first].size();
  Matrix m(table.size() - first, cols);
  for (std::size_t r = first; r < table.size(); ++r) {
    if (table[r].size() != cols)
      fail(ErrorCode::parse, "row " + std::to_string(r) + " has inconsistent column count");
    for (std::size_t c = 0; c < cols; ++c) {
      const auto v = parse_real(table[r][c]);
      if (!v) fail(ErrorCode::parse, "non-numeric cell at row " + std::to_string(r) + ": '" + table[r][c] + "'");
      m(r - first, c) = *v;
    }
  }
  return m;
}

std::string dataset_to_csv(const Dataset& d) {
  std::vector<std::string> header = d.feature_names;
  header.push_back(d.label_column);
  std::string out = csv_line(header);
  std::vector<std::string> rec(header.size());
  for (std::size_t r = 0; r < d.size(); ++r) {
    for (std::size_t c = 0; c < d.features.cols(); ++c) rec[c] = format_real(d.features(r, c));
    rec.back() = d.class_names[static_cast<std::size_t>(d.labels[r])];
    out += csv_line(rec);
  }
  return out;
}

void save_csv(const Dataset& d, const std::filesystem::path& path) { write_file(path, dataset_to_csv(d)); }

ColumnRange column_ranges(const Matrix& m) {
  ColumnRange range;
  range.min.assign(m.cols(), 0.0);
  range.max.assign(m.cols(), 0.0);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double lo = m(0, c), hi = m(0, c);
    for (std::size_t r = 1; r < m.rows(); ++r) {
      lo = std::min(lo, m(r, c));
      hi = std::max(hi, m(r, c));
    }
    range.min[c] = lo;
    range.max[c] = hi;
  }
  return range;
}

Dataset minmax_scale(const Dataset& d, ColumnRange& fitted) {
  require(d.size() > 0, "empty dataset");
  fitted = column_ranges(d.features);
  Dataset out = d;
  for (std::size_t c = 0; c < d.features.cols(); ++c) {
    const double lo = fitted.min[c];
    const double span = fitted.max[c] - lo;
    for (std::size_t r = 0; r < d.size(); ++r)
      out.features(r, c) = span > 0.0 ? std::clamp((d.features(r, c) - lo) / span, 0.0, 1.0) : 0.0;
  }
  return out;
}

Dataset minmax_scale(const Dataset& d) {
  ColumnRange unused;
  return minmax_scale(d, unused);
}

std::string scaling_sidecar_json(const Dataset& scaled, const ColumnRange& range) {
  nlohmann::ordered_json doc;
  doc["label_column"] = scaled.label_column;
  doc["class_names"] = scaled.class_names;
  doc["feature_names"] = scaled.feature_names;
  doc["min"] = range.min;
  doc["max"] = range.max;
  return doc.dump(2) + "\n";
}

Matrix inverse_minmax(const Matrix& scaled, const ColumnRange& range) {
  require(range.min.size() == scaled.cols(), "scaling range does not match column count");
  Matrix out = scaled;
  for (std::size_t r = 0; r < scaled.rows(); ++r)
    for (std::size_t c = 0; c < scaled.cols(); ++c)
      out(r, c) = range.min[c] + scaled(r, c) * (range.max[c] - range.min[c]);
  return out;
}

void NoiseSpec::validate() const {
  require(sigma > 0.0, "noise sigma must be > 0");
  require(alpha >= 0.0 && alpha <= 1.0, "noise alpha must lie in [0, 1]");
}

double gaussian_pdf(double x, double mu, double sigma) {
  const double z = x - mu;
  return std::exp(-(z * z) / (2.0 * sigma * sigma)) / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
}

Dataset add_noise(const Dataset& d, const NoiseSpec& spec) {
  spec.validate();
  Dataset out = d;
  if (spec.alpha == 0.0) return out;
  auto& values = out.features.data();
  if (spec.mode == NoiseMode::literal_pdf) {
    for (double& x : values) x += spec.alpha * gaussian_pdf(x, spec.mu, spec.sigma);
  } else {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> eps(spec.mu, spec.sigma);
    for (double& x : values) x += spec.alpha * eps(rng);
  }
  return out;
}

namespace {

std::size_t test_count(std::size_t n, double fraction) {
  const auto t = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fraction));
  return std::clamp<std::size_t>(t, 1, n - 1);
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const Dataset& d, double test_fraction, std::uint64_t seed, bool stratified) {
  require(test_fraction > 0.0 && test_fraction < 1.0, "test fraction must lie in (0, 1)");
  require(d.size() >= 2, "split needs at least 2 rows");

  std::mt19937_64 rng(seed);
  std::vector<char> is_test(d.size(), 0);
  if (stratified) {
    std::vector<std::vector<std::size_t>> by_class(d.class_names.size());
    for (std::size_t r = 0; r < d.size(); ++r) by_class[static_cast<std::size_t>(d.labels[r])].push_back(r);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
      auto& rows = by_class[c];
      if (rows.empty()) continue;
      if (rows.size() < 2)
        fail(ErrorCode::invalid_argument,
             "class '" + d.class_names[c] + "' has 1 sample; stratified split needs at least 2");
      std::shuffle(rows.begin(), rows.end(), rng);
      const std::size_t t = test_count(rows.size(), test_fraction);
      for (std::size_t i = 0; i < t; ++i) is_test[rows[i]] = 1;
    }
  } else {
    std::vector<std::size_t> rows(d.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    std::shuffle(rows.begin(), rows.end(), rng);
    const std::size_t t = test_count(rows.size(), test_fraction);
    for (std::size_t i = 0; i < t; ++i) is_test[rows[i]] = 1;
  }

  std::vector<std::size_t> train, test;
  for (std::size_t r = 0; r < d.size(); ++r) (is_test[r] ? test : train).push_back(r);
  return {train, test};
}

std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction, std::uint64_t seed, bool stratified) {
  auto [train, test] = split_indices(d, test_fraction, seed, stratified);
  return {d.select_rows(train), d.select_rows(test)};
}

std::vector<std::string> synth_class_names(int n_classes) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n_classes));
  names.emplace_back("Benign");
  for (int k = 1; k < n_classes; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "Malware%03d", k);
    names.emplace_back(buf);
  }
  return names;
}

Dataset synth_blobs(int n_classes, int per_class, int dims, double separation, std::uint64_t seed) {
  require(n_classes > 0 && per_class > 0 && dims > 0, "synth_blobs: counts must be positive");
  Dataset d;
  d.class_names = synth_class_names(n_classes);
  for (int j = 0; j < dims; ++j) d.feature_names.push_back("f" + std::to_string(j));
  const auto n = static_cast<std::size_t>(n_classes) * static_cast<std::size_t>(per_class);
  d.features = Matrix(n, static_cast<std::size_t>(dims));
  d.labels.reserve(n);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::size_t r = 0;
  for (int k = 0; k < n_classes; ++k) {
    const int axis = k % dims;
    const double sign = (k / dims) % 2 == 0 ? 1.0 : -1.0;
    for (int i = 0; i < per_class; ++i, ++r) {
      for (int j = 0; j < dims; ++j) d.features(r, static_cast<std::size_t>(j)) = unit(rng);
      d.features(r, static_cast<std::size_t>(axis)) += sign * separation;
      d.labels.push_back(k);
    }
  }
  return d;
}

}  // namespace tdamal::dataio
