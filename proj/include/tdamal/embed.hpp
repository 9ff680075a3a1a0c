#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "tdamal/dataio.hpp"
#include "tdamal/matrix.hpp"

namespace tdamal::embed {

enum class Method { pca, external };

/// Image of the lens function: one row per sample.
struct Embedding {
  Matrix coords;
  Method method = Method::pca;
  std::size_t components = 0;
  /// Set when requested components exceed the data rank; those columns are zero.
  bool rank_deficient = false;
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Eigenvalues come back in non-increasing order; `vectors` holds them as columns.
struct EigenResult {
  std::vector<double> values;
  Matrix vectors;
  int sweeps = 0;
};

EigenResult jacobi_eigen(const Matrix& symmetric, double tol = 1e-10, int max_sweeps = 100);

/// Fitted principal axes, reusable on rows that were not part of the fit.
struct PcaModel {
  std::vector<double> mean;
  Matrix loadings;  // features x components
  std::vector<double> explained_variance;
  bool rank_deficient = false;

  Embedding transform(const Matrix& x) const;
  /// Maps component scores back into feature space.
  Matrix inverse_transform(const Matrix& scores) const;
};

/// Principal axes of the mean-centred sample covariance. Each axis is signed
/// so that its largest-magnitude loading is positive.
PcaModel fit_pca(const Matrix& x, std::size_t components);
Embedding pca(const dataio::Dataset& d, std::size_t components);

/// Ingests an externally computed embedding (t-SNE, UMAP, ...).
Embedding parse_embedding(std::string_view csv_text, std::size_t expected_rows);
Embedding import_embedding(const std::filesystem::path& path, std::size_t expected_rows);

/// Headerless numeric CSV, one row per sample.
std::string embedding_to_csv(const Embedding& e);

/// Single-column lens taken straight from a feature column.
Embedding column_lens(const Matrix& x, std::size_t column);

/// Dense symmetric Euclidean distance matrix with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  /// Writes both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double v) {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }
  std::span<const double> row(std::size_t i) const { return {d_.data() + i * n_, n_}; }
  DistanceMatrix restrict_to(std::span<const std::size_t> indices) const;

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

DistanceMatrix distance_matrix(const Matrix& coords);

}  // namespace tdamal::embed
