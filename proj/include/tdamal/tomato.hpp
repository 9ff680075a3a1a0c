#pragma once

#include <limits>
#include <string>
#include <vector>

#include "tdamal/embed.hpp"
#include "tdamal/matrix.hpp"

namespace tdamal::tomato {

struct Neighbor {
  std::size_t index = 0;
  double distance = 0.0;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// k-NN graph. `knn[i]` lists exactly min(k, n-1) nearest neighbours of i
/// (ascending distance, ties to the lower index); `adjacency[i]` is the
/// symmetrized neighbourhood sorted by index.
struct NeighborGraph {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t ambient_dim = 0;  // needed by the k-NN density; 0 when unknown
  std::vector<std::vector<Neighbor>> knn;
  std::vector<std::vector<Neighbor>> adjacency;
};

NeighborGraph knn_graph(const Matrix& coords, std::size_t k);
NeighborGraph knn_graph(const embed::DistanceMatrix& d, std::size_t k, std::size_t ambient_dim = 0);

enum class DensityMethod { dtm, knn_density };

struct DensityEstimate {
  std::vector<double> values;
  DensityMethod method = DensityMethod::dtm;
  /// Set when a zero neighbour distance forced a value to `cap`.
  bool capped = false;
};

/// dtm: inverse root-mean-square distance to the k neighbours.
/// knn-density: k / (n * V_d * r_k^d), r_k the k-th neighbour distance.
DensityEstimate estimate_density(const NeighborGraph& g, DensityMethod method, double cap = 1e12);

/// Volume of the d-dimensional unit ball.
double unit_ball_volume(std::size_t d);

enum class OutputFilter {
  density,     // keep entries whose root density is >= delta
  prominence,  // keep entries whose root prominence is >= delta
};

struct ProminencePair {
  double birth = 0.0;  // density of the root that stopped being a root
  double death = 0.0;  // density of the vertex where it merged
  std::size_t root = 0;
  double prominence() const noexcept { return birth - death; }
};

struct TomatoResult {
  /// Cluster id per vertex; ids index `roots`.
  std::vector<int> assignment;
  std::vector<std::size_t> roots;  // surviving peaks, by decreasing density
  std::vector<double> root_density;
  /// Density drop from the root to the first neighbouring entry it touched
  /// without merging; infinity when it never touched another entry.
  std::vector<double> root_prominence;
  /// Output-filter verdict per cluster.
  std::vector<bool> kept;
  std::vector<ProminencePair> prominence_diagram;
  double delta = 0.0;
  OutputFilter filter = OutputFilter::density;

  std::size_t cluster_count() const noexcept { return roots.size(); }
  std::size_t kept_count() const;
  /// Assignment with vertices of filtered-out clusters mapped to -1.
  std::vector<int> filtered_assignment() const;
};

inline constexpr double infinite_delta = std::numeric_limits<double>::infinity();

/// Union-find merging over vertices in decreasing density order (ties to the
/// lower index). A vertex with no denser neighbour opens an entry; otherwise
/// it joins the entry of its densest processed neighbour, then every other
/// neighbouring entry e merges with it when
///   min(f(r(e)), f(r(e_i))) < f(x_i) + delta,
/// the denser root surviving.
TomatoResult tomato_cluster(const NeighborGraph& g, const DensityEstimate& f, double delta,
                            OutputFilter filter = OutputFilter::density);

/// Vertices with no strictly denser neighbour under the tie-break order.
std::size_t local_maxima_count(const NeighborGraph& g, const DensityEstimate& f);

/// Prominences sorted descending.
std::vector<double> sorted_prominences(const TomatoResult& r);

/// Threshold separating the two most prominent peaks from the rest. Each root
/// surviving the delta = infinity run counts with prominence equal to its
/// density; the result is the midpoint of the second and third largest
/// prominences, half the second with only two, 0 with fewer.
double delta_between_top_two(const TomatoResult& infinite_run);

std::string assignment_to_csv(const TomatoResult& r);
/// Persistence-diagram CSV layout with dim fixed to 0.
std::string prominence_to_csv(const TomatoResult& r);

}  // namespace tdamal::tomato
