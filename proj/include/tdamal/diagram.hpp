#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tdamal/dataio.hpp"
#include "tdamal/persistence.hpp"

namespace tdamal::diagram {

using persistence::PersistenceDiagram;
using persistence::PersistencePoint;

/// One matched pair. An index of -1 stands for the diagonal.
struct MatchedPair {
  int a = -1;
  int b = -1;
  double cost = 0.0;
};

/// Witness matching. Indices refer to the per-dimension point lists
/// returned by PersistenceDiagram::in_dim, in that order.
struct MatchingCertificate {
  std::vector<MatchedPair> pairs;
  double cost = 0.0;
};

struct BottleneckResult {
  double distance = 0.0;
  MatchingCertificate certificate;
};

double linf(const PersistencePoint& p, const PersistencePoint& q);
double diagonal_cost(const PersistencePoint& p);

/// Exact bottleneck distance between the off-diagonal points of two
/// diagrams in dimension `dim`. Finite points are matched by binary search
/// over the candidate costs with bipartite feasibility; essential points are
/// matched among themselves by sorted birth, and differing essential counts
/// give an infinite distance.
BottleneckResult bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim);

/// Finite-point bottleneck on raw point lists (essential points not allowed).
BottleneckResult bottleneck_finite(std::span<const PersistencePoint> a, std::span<const PersistencePoint> b);

inline constexpr std::size_t stats_per_dim = 6;
inline constexpr std::size_t vector_dims = 3;
inline constexpr std::size_t feature_length = stats_per_dim * vector_dims;

/// Per dimension 0..2: point count, total persistence, max persistence,
/// mean birth, mean death, persistence entropy. Essential points count
/// towards `count` and `mean birth` only.
using DiagramFeatureVector = std::array<double, feature_length>;

DiagramFeatureVector vectorize(const PersistenceDiagram& dg);
double persistence_entropy(std::span<const double> lifetimes);
std::vector<std::string> feature_names();

struct LocalFeatureOptions {
  std::size_t k_neighbors = 20;
  /// Highest homology dimension kept; the local complex is built one
  /// dimension higher so these classes can die.
  int max_homology_dim = 1;
};

/// Row i: vectorized diagram of the Rips filtration on sample i together
/// with its k nearest neighbours (Euclidean, ties to the lower index).
Matrix local_diagram_features(const dataio::Dataset& d, const LocalFeatureOptions& options = {});
Matrix local_diagram_features(const Matrix& x, const LocalFeatureOptions& options = {});

}  // namespace tdamal::diagram
