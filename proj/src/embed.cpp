#include "tdamal/embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tdamal/error.hpp"
#include "tdamal/text.hpp"

namespace tdamal::embed {

EigenResult jacobi_eigen(const Matrix& symmetric, double tol, int max_sweeps) {
  require(symmetric.rows() == symmetric.cols(), "jacobi_eigen: matrix must be square");
  const std::size_t n = symmetric.rows();
  Matrix a = symmetric;
  Matrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double frob = 0.0;
  for (double x : a.data()) frob += x * x;
  frob = std::sqrt(frob);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };

  EigenResult out;
  // Tolerance is relative to the Frobenius norm so scaled and raw data converge alike.
  while (out.sweeps < max_sweeps && off_norm() > tol * std::max(frob, 1e-300)) {
    ++out.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

PcaModel fit_pca(const Matrix& x, std::size_t components) {
  require(x.rows() >= 2, "pca needs at least 2 rows");
  require(components >= 1 && components <= x.cols(), "pca: components must lie in [1, feature count]");
  const std::size_t n = x.rows(), p = x.cols();

  PcaModel model;
  model.mean.assign(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) model.mean[c] += x(r, c);
  for (double& m : model.mean) m /= static_cast<double>(n);

  Matrix cov(p, p);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = x.row(r);
    for (std::size_t i = 0; i < p; ++i) {
      const double di = row[i] - model.mean[i];
      for (std::size_t j = i; j < p; ++j) cov(i, j) += di * (row[j] - model.mean[j]);
    }
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) {
      cov(i, j) /= static_cast<double>(n - 1);
      cov(j, i) = cov(i, j);
    }

  const EigenResult eig = jacobi_eigen(cov);
  const double top = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
  model.loadings = Matrix(p, components);
  for (std::size_t j = 0; j < components; ++j) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < p; ++i)
      if (std::abs(eig.vectors(i, j)) > std::abs(eig.vectors(arg, j))) arg = i;
    const double sign = eig.vectors(arg, j) < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < p; ++i) model.loadings(i, j) = sign * eig.vectors(i, j);
    const double var = std::max(eig.values[j], 0.0);
    if (var <= 1e-12 * top || top == 0.0) {
      model.rank_deficient = true;
      model.explained_variance.push_back(0.0);
    } else {
      model.explained_variance.push_back(var);
    }
  }
  return model;
}

Embedding PcaModel::transform(const Matrix& x) const {
  require(x.cols() == mean.size(), "pca transform: feature count mismatch");
  const std::size_t k = loadings.cols();
  Embedding e;
  e.method = Method::pca;
  e.components = k;
  e.rank_deficient = rank_deficient;
  e.coords = Matrix(x.rows(), k);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t j = 0; j < k; ++j) {
      if (explained_variance[j] == 0.0) continue;  // zero-variance tail stays 0
      double s = 0.0;
      for (std::size_t i = 0; i < row.size(); ++i) s += (row[i] - mean[i]) * loadings(i, j);
      e.coords(r, j) = s;
    }
  }
  return e;
}

Matrix PcaModel::inverse_transform(const Matrix& scores) const {
  require(scores.cols() == loadings.cols(), "pca inverse: component count mismatch");
  Matrix out(scores.rows(), mean.size());
  for (std::size_t r = 0; r < scores.rows(); ++r)
    for (std::size_t i = 0; i < mean.size(); ++i) {
      double s = mean[i];
      for (std::size_t j = 0; j < loadings.cols(); ++j) s += scores(r, j) * loadings(i, j);
      out(r, i) = s;
    }
  return out;
}

Embedding pca(const dataio::Dataset& d, std::size_t components) {
  return fit_pca(d.features, components).transform(d.features);
}

Embedding parse_embedding(std::string_view csv_text, std::size_t expected_rows) {
  Embedding e;
  e.coords = dataio::parse_numeric_table(csv_text);
  if (e.coords.rows() != expected_rows)
    fail(ErrorCode::invalid_argument, "embedding row count " + std::to_string(e.coords.rows()) +
                                          " does not match expected " + std::to_string(expected_rows));
  e.method = Method::external;
  e.components = e.coords.cols();
  return e;
}

Embedding import_embedding(const std::filesystem::path& path, std::size_t expected_rows) {
  return parse_embedding(read_file(path), expected_rows);
}

std::string embedding_to_csv(const Embedding& e) {
  std::string out;
  std::vector<std::string> rec(e.coords.cols());
  for (std::size_t r = 0; r < e.coords.rows(); ++r) {
    for (std::size_t c = 0; c < e.coords.cols(); ++c) rec[c] = format_real(e.coords(r, c));
    out += csv_line(rec);
  }
  return out;
}

Embedding column_lens(const Matrix& x, std::size_t column) {
  require(column < x.cols(), "lens column out of range");
  Embedding e;
  e.method = Method::external;
  e.components = 1;
  e.coords = Matrix(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) e.coords(r, 0) = x(r, column);
  return e;
}

DistanceMatrix DistanceMatrix::restrict_to(std::span<const std::size_t> indices) const {
  DistanceMatrix out(indices.size());
  for (std::size_t a = 0; a < indices.size(); ++a)
    for (std::size_t b = a + 1; b < indices.size(); ++b) out.set(a, b, (*this)(indices[a], indices[b]));
  return out;
}

DistanceMatrix distance_matrix(const Matrix& coords) {
  require(coords.rows() >= 1, "distance matrix needs at least 1 row");
  DistanceMatrix d(coords.rows());
  for (std::size_t i = 0; i < coords.rows(); ++i)
    for (std::size_t j = i + 1; j < coords.rows(); ++j) d.set(i, j, euclidean(coords.row(i), coords.row(j)));
  return d;
}

}  // namespace tdamal::embed
