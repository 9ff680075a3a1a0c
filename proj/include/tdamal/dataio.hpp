#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tdamal/matrix.hpp"

namespace tdamal::dataio {

/// Feature table with encoded class labels.
///
/// Invariants: `features.rows() == labels.size()`, every label indexes
/// `class_names`, and `feature_names.size() == features.cols()`.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<std::string> feature_names;
  std::string label_column = "Class";

  std::size_t size() const noexcept { return labels.size(); }
  Dataset select_rows(std::span<const std::size_t> rows) const;
  /// Same labels and names, new feature block.
  Dataset with_features(Matrix f, std::vector<std::string> names) const;
  void validate() const;
};

/// Parses a CSV document with a mandatory header. Non-label columns become
/// features in header order; class strings are encoded by byte-wise
/// lexicographic order of their distinct values.
Dataset parse_dataset(std::string_view csv_text, std::string_view label_column);
Dataset load_csv(const std::filesystem::path& path, std::string_view label_column);

/// Reads a purely numeric table. A first row that fails to parse as numbers
/// is treated as a header and skipped.
Matrix parse_numeric_table(std::string_view csv_text);

std::string dataset_to_csv(const Dataset& d);
void save_csv(const Dataset& d, const std::filesystem::path& path);

struct ColumnRange {
  std::vector<double> min;
  std::vector<double> max;
};

ColumnRange column_ranges(const Matrix& m);

/// (x - min) / (max - min) per column; constant columns map to 0.
Dataset minmax_scale(const Dataset& d);
Dataset minmax_scale(const Dataset& d, ColumnRange& fitted);

/// Sidecar document describing a scaled dataset so the transform can be inverted.
std::string scaling_sidecar_json(const Dataset& scaled, const ColumnRange& range);
Matrix inverse_minmax(const Matrix& scaled, const ColumnRange& range);

enum class NoiseMode { literal_pdf, random_draw };

struct NoiseSpec {
  double mu = 0.0;
  double sigma = 0.1;
  double alpha = 0.0;
  NoiseMode mode = NoiseMode::literal_pdf;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Gaussian density with mean `mu` and standard deviation `sigma`.
double gaussian_pdf(double x, double mu, double sigma);

/// Applies x + alpha * p(x) (literal-pdf) or x + alpha * N(mu, sigma^2)
/// (random-draw) to every feature value. Labels are untouched.
Dataset add_noise(const Dataset& d, const NoiseSpec& spec);

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    const Dataset& d, double test_fraction, std::uint64_t seed, bool stratified);

/// Row partition into (train, test). Both parts keep the original row order.
std::pair<Dataset, Dataset> split(const Dataset& d, double test_fraction, std::uint64_t seed,
                                  bool stratified = true);

/// Isotropic unit-variance Gaussian blobs. Class k is centred at
/// separation * e_(k mod dims), with the sign flipped on every wrap-around
/// so that classes stay distinct when there are more classes than dims.
Dataset synth_blobs(int n_classes, int per_class, int dims, double separation, std::uint64_t seed);

/// Class names used by synth_blobs: "Benign" first, then "Malware001", ...
std::vector<std::string> synth_class_names(int n_classes);

}  // namespace tdamal::dataio
