#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tdamal/dataio.hpp"
#include "tdamal/embed.hpp"

namespace tdamal::mapper {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Axis-aligned box over the lens image, one interval per lens dimension.
struct Box {
  std::vector<Interval> sides;
  bool contains(std::span<const double> point) const;
  friend bool operator==(const Box&, const Box&) = default;
};

struct Cover {
  std::size_t dims = 1;
  int intervals_per_dim = 1;
  double overlap = 0.3;
  std::vector<std::vector<Interval>> axes;  // per-dimension intervals
  std::vector<Box> boxes;                   // cross product, last dimension fastest

  friend bool operator==(const Cover&, const Cover&) = default;
};

/// Splits each lens coordinate's [min, max] into `intervals` equal pieces and
/// widens each by overlap * width / 2 on both sides, so neighbours share a
/// fraction `overlap` of the base width. A zero-range coordinate gets a single
/// interval.
Cover build_cover(const embed::Embedding& lens, int intervals, double overlap);

/// Cut distance for single linkage; nullopt selects the histogram-gap rule.
using ClusterEps = std::optional<double>;

/// Cut chosen from the minimum spanning tree edge lengths: a 10-bin histogram
/// over [0, max] is scanned for the longest run of empty bins lying between
/// occupied ones, and the cut is placed at the start of that run. Without
/// such a gap nothing is cut.
double auto_eps(std::span<const double> mst_lengths);

/// Single-linkage clusters of `rows` (Euclidean in the columns of `x`), each
/// sorted ascending, clusters ordered by smallest member.
std::vector<std::vector<std::size_t>> single_linkage(const Matrix& x, std::span<const std::size_t> rows,
                                                     ClusterEps eps);

struct MapperNode {
  int id = 0;
  std::size_t box = 0;
  std::vector<std::size_t> members;
  std::vector<double> mean_lens;
  std::vector<std::size_t> label_hist;  // aligned with params.class_names
  bool flag_novel = false;

  std::size_t size() const noexcept { return members.size(); }
  friend bool operator==(const MapperNode&, const MapperNode&) = default;
};

struct MapperEdge {
  int source = 0;
  int target = 0;
  std::size_t shared = 0;
  friend bool operator==(const MapperEdge&, const MapperEdge&) = default;
};

struct MapperParams {
  std::string lens = "pca";
  Cover cover;
  ClusterEps cluster_eps;
  std::vector<std::string> class_names;
  std::size_t n_rows = 0;
  friend bool operator==(const MapperParams&, const MapperParams&) = default;
};

struct MapperGraph {
  MapperParams params;
  std::vector<MapperNode> nodes;
  std::vector<MapperEdge> edges;
  friend bool operator==(const MapperGraph&, const MapperGraph&) = default;
};

/// Rows whose lens coordinates fall inside `box`, ascending.
std::vector<std::size_t> preimage(const embed::Embedding& lens, const Box& box);

/// Runs the full pipeline: preimage per box, single-linkage clustering in
/// feature space, one node per cluster, an edge for every pair of clusters
/// sharing a row. Node ids follow (box index, cluster rank).
MapperGraph mapper_graph(const dataio::Dataset& d, const embed::Embedding& lens, const Cover& cover,
                         ClusterEps eps, std::string lens_descriptor = "pca");

/// Nerve of explicitly supplied per-box clusters.
MapperGraph assemble_graph(const dataio::Dataset& d, const embed::Embedding& lens, MapperParams params,
                           const std::vector<std::vector<std::vector<std::size_t>>>& box_clusters);

/// Plurality share at most one half, or an unlabeled/unknown class dominating.
bool is_novel(const std::vector<std::size_t>& label_hist, const std::vector<std::string>& class_names);

std::size_t connected_components(const MapperGraph& g);
/// edges - nodes + components of the nerve 1-skeleton.
long first_betti(const MapperGraph& g);

nlohmann::ordered_json graph_to_json(const MapperGraph& g);
MapperGraph graph_from_json(const nlohmann::json& doc);
std::string export_graph(const MapperGraph& g);
MapperGraph parse_graph(std::string_view document);

}  // namespace tdamal::mapper
