#include "tdamal/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "tdamal/error.hpp"
#include "tdamal/text.hpp"

namespace tdamal::mapper {

bool Box::contains(std::span<const double> point) const {
  for (std::size_t k = 0; k < sides.size(); ++k)
    if (!sides[k].contains(point[k])) return false;
  return true;
}

Cover build_cover(const embed::Embedding& lens, int intervals, double overlap) {
  require(intervals >= 1, "cover: intervals per dimension must be >= 1");
  require(overlap > 0.0 && overlap < 1.0, "cover: overlap must lie in (0, 1)");
  const std::size_t dims = lens.coords.cols();
  require(dims == 1 || dims == 2, "cover: lens must have 1 or 2 components");
  require(lens.coords.rows() >= 1, "cover: empty lens");

  Cover cover;
  cover.dims = dims;
  cover.intervals_per_dim = intervals;
  cover.overlap = overlap;
  const auto range = dataio::column_ranges(lens.coords);
  for (std::size_t k = 0; k < dims; ++k) {
    std::vector<Interval> axis;
    const double lo = range.min[k], hi = range.max[k];
    if (hi <= lo) {
      axis.push_back({lo, hi});
    } else {
      const double width = (hi - lo) / intervals;
      const double pad = overlap * width / 2.0;
      for (int i = 0; i < intervals; ++i) {
        const double a = lo + width * i;
        const double b = i + 1 == intervals ? hi : lo + width * (i + 1);
        axis.push_back({a - pad, b + pad});
      }
    }
    cover.axes.push_back(std::move(axis));
  }

  std::vector<std::size_t> idx(dims, 0);
  while (true) {
    Box box;
    for (std::size_t k = 0; k < dims; ++k) box.sides.push_back(cover.axes[k][idx[k]]);
    cover.boxes.push_back(std::move(box));
    std::size_t k = dims;
    while (k > 0) {
      --k;
      if (++idx[k] < cover.axes[k].size()) break;
      idx[k] = 0;
      if (k == 0) return cover;
    }
  }
}

double auto_eps(std::span<const double> mst_lengths) {
  constexpr int bins = 10;
  if (mst_lengths.empty()) return std::numeric_limits<double>::infinity();
  const double top = *std::max_element(mst_lengths.begin(), mst_lengths.end());
  if (top <= 0.0) return std::numeric_limits<double>::infinity();
  std::array<int, bins> hist{};
  for (double l : mst_lengths) ++hist[static_cast<std::size_t>(std::min(bins - 1, static_cast<int>(l / top * bins)))];

  int best_start = -1, best_len = 0;
  for (int b = 1; b < bins;) {
    if (hist[static_cast<std::size_t>(b)] != 0 || hist[static_cast<std::size_t>(b - 1)] == 0) {
      ++b;
      continue;
    }
    int e = b;
    while (e < bins && hist[static_cast<std::size_t>(e)] == 0) ++e;
    // bin `bins - 1` always holds the maximum, so every run found here is interior
    if (e - b > best_len) {
      best_len = e - b;
      best_start = b;
    }
    b = e;
  }
  if (best_start < 0) return std::numeric_limits<double>::infinity();
  return top * best_start / bins;
}

std::vector<std::vector<std::size_t>> single_linkage(const Matrix& x, std::span<const std::size_t> rows,
                                                     ClusterEps eps) {
  const std::size_t m = rows.size();
  if (m == 0) return {};

  // Prim's algorithm on the dense preimage.
  std::vector<double> best(m, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(m, 0);
  std::vector<char> in_tree(m, 0);
  std::vector<std::pair<std::size_t, std::size_t>> tree_edges;
  std::vector<double> lengths;
  best[0] = 0.0;
  for (std::size_t it = 0; it < m; ++it) {
    std::size_t u = m;
    for (std::size_t v = 0; v < m; ++v)
      if (!in_tree[v] && (u == m || best[v] < best[u])) u = v;
    in_tree[u] = 1;
    if (it > 0) {
      tree_edges.emplace_back(from[u], u);
      lengths.push_back(best[u]);
    }
    for (std::size_t v = 0; v < m; ++v) {
      if (in_tree[v]) continue;
      const double dist = euclidean(x.row(rows[u]), x.row(rows[v]));
      if (dist < best[v]) {
        best[v] = dist;
        from[v] = u;
      }
    }
  }

  const double cut = eps ? *eps : auto_eps(lengths);
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t e = 0; e < tree_edges.size(); ++e)
    if (lengths[e] <= cut) parent[find(tree_edges[e].first)] = find(tree_edges[e].second);

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < m; ++i) groups[find(i)].push_back(rows[i]);
  std::vector<std::vector<std::size_t>> clusters;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return clusters;
}

std::vector<std::size_t> preimage(const embed::Embedding& lens, const Box& box) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < lens.coords.rows(); ++r)
    if (box.contains(lens.coords.row(r))) rows.push_back(r);
  return rows;
}

bool is_novel(const std::vector<std::size_t>& label_hist, const std::vector<std::string>& class_names) {
  const std::size_t total = std::accumulate(label_hist.begin(), label_hist.end(), std::size_t{0});
  if (total == 0) return true;
  const auto top = std::max_element(label_hist.begin(), label_hist.end());
  const auto cls = static_cast<std::size_t>(top - label_hist.begin());
  if (cls < class_names.size()) {
    const auto name = to_lower(class_names[cls]);
    if (name == "unknown" || name == "unlabeled" || name == "unlabelled" || name.empty()) return true;
  }
  return 2 * *top <= total;
}

MapperGraph assemble_graph(const dataio::Dataset& d, const embed::Embedding& lens, MapperParams params,
                           const std::vector<std::vector<std::vector<std::size_t>>>& box_clusters) {
  require(lens.coords.rows() == d.size(), "mapper: lens rows do not align with dataset rows");
  MapperGraph g;
  params.class_names = d.class_names;
  params.n_rows = d.size();
  g.params = std::move(params);

  std::vector<std::vector<int>> nodes_of_row(d.size());
  for (std::size_t b = 0; b < box_clusters.size(); ++b) {
    for (const auto& members : box_clusters[b]) {
      if (members.empty()) continue;
      MapperNode node;
      node.id = static_cast<int>(g.nodes.size());
      node.box = b;
      node.members = members;
      node.mean_lens.assign(lens.coords.cols(), 0.0);
      node.label_hist.assign(d.class_names.size(), 0);
      for (auto r : members) {
        for (std::size_t k = 0; k < lens.coords.cols(); ++k) node.mean_lens[k] += lens.coords(r, k);
        ++node.label_hist[static_cast<std::size_t>(d.labels[r])];
        nodes_of_row[r].push_back(node.id);
      }
      for (double& v : node.mean_lens) v /= static_cast<double>(members.size());
      node.flag_novel = is_novel(node.label_hist, d.class_names);
      g.nodes.push_back(std::move(node));
    }
  }

  std::map<std::pair<int, int>, std::size_t> shared;
  for (const auto& ids : nodes_of_row)
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) ++shared[{std::min(ids[i], ids[j]), std::max(ids[i], ids[j])}];
  for (const auto& [key, count] : shared) g.edges.push_back({key.first, key.second, count});
  return g;
}

MapperGraph mapper_graph(const dataio::Dataset& d, const embed::Embedding& lens, const Cover& cover, ClusterEps eps,
                         std::string lens_descriptor) {
  require(lens.coords.rows() == d.size(), "mapper: lens rows do not align with dataset rows");
  require(lens.coords.cols() == cover.dims, "mapper: lens dimension does not match cover");
  if (eps) require(*eps >= 0.0, "mapper: cluster eps must be non-negative");
  std::vector<std::vector<std::vector<std::size_t>>> box_clusters;
  box_clusters.reserve(cover.boxes.size());
  for (const auto& box : cover.boxes) {
    const auto rows = preimage(lens, box);
    box_clusters.push_back(single_linkage(d.features, rows, eps));
  }
  MapperParams params;
  params.lens = std::move(lens_descriptor);
  params.cover = cover;
  params.cluster_eps = eps;
  return assemble_graph(d, lens, std::move(params), box_clusters);
}

std::size_t connected_components(const MapperGraph& g) {
  std::vector<std::size_t> parent(g.nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::size_t components = g.nodes.size();
  for (const auto& e : g.edges) {
    const auto a = find(static_cast<std::size_t>(e.source)), b = find(static_cast<std::size_t>(e.target));
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components;
}

long first_betti(const MapperGraph& g) {
  return static_cast<long>(g.edges.size()) - static_cast<long>(g.nodes.size()) +
         static_cast<long>(connected_components(g));
}

nlohmann::ordered_json graph_to_json(const MapperGraph& g) {
  using nlohmann::ordered_json;
  ordered_json params;
  params["lens"] = g.params.lens;
  params["intervals"] = g.params.cover.intervals_per_dim;
  params["overlap"] = g.params.cover.overlap;
  if (g.params.cluster_eps)
    params["cluster_eps"] = *g.params.cluster_eps;
  else
    params["cluster_eps"] = "auto";
  params["n_rows"] = g.params.n_rows;
  params["class_names"] = g.params.class_names;
  ordered_json cover;
  cover["dims"] = g.params.cover.dims;
  ordered_json axes = ordered_json::array();
  for (const auto& axis : g.params.cover.axes) {
    ordered_json a = ordered_json::array();
    for (const auto& iv : axis) a.push_back({iv.lo, iv.hi});
    axes.push_back(std::move(a));
  }
  cover["axes"] = std::move(axes);
  params["cover"] = std::move(cover);

  ordered_json nodes = ordered_json::array();
  for (const auto& n : g.nodes) {
    ordered_json node;
    node["id"] = n.id;
    node["box"] = n.box;
    node["size"] = n.size();
    node["members"] = n.members;
    node["mean_lens"] = n.mean_lens;
    ordered_json hist = ordered_json::object();
    for (std::size_t c = 0; c < n.label_hist.size(); ++c) {
      const std::string name = c < g.params.class_names.size() ? g.params.class_names[c] : std::to_string(c);
      hist[name] = n.label_hist[c];
    }
    node["label_hist"] = std::move(hist);
    node["flag_novel"] = n.flag_novel;
    nodes.push_back(std::move(node));
  }
  ordered_json edges = ordered_json::array();
  for (const auto& e : g.edges) edges.push_back({{"source", e.source}, {"target", e.target}, {"shared", e.shared}});

  ordered_json doc;
  doc["params"] = std::move(params);
  doc["nodes"] = std::move(nodes);
  doc["edges"] = std::move(edges);
  return doc;
}

MapperGraph graph_from_json(const nlohmann::json& doc) {
  try {
    MapperGraph g;
    const auto& p = doc.at("params");
    g.params.lens = p.value("lens", std::string("pca"));
    g.params.cover.intervals_per_dim = p.value("intervals", 1);
    g.params.cover.overlap = p.value("overlap", 0.3);
    if (p.contains("cluster_eps") && p["cluster_eps"].is_number()) g.params.cluster_eps = p["cluster_eps"].get<double>();
    g.params.n_rows = p.value("n_rows", std::size_t{0});
    g.params.class_names = p.value("class_names", std::vector<std::string>{});
    if (p.contains("cover")) {
      const auto& c = p["cover"];
      g.params.cover.dims = c.value("dims", std::size_t{1});
      for (const auto& axis : c.at("axes")) {
        std::vector<Interval> ivs;
        for (const auto& iv : axis) ivs.push_back({iv.at(0).get<double>(), iv.at(1).get<double>()});
        g.params.cover.axes.push_back(std::move(ivs));
      }
      if (!g.params.cover.axes.empty()) {
        // Rebuild the box list in the same order build_cover produces.
        std::vector<std::size_t> idx(g.params.cover.axes.size(), 0);
        bool done = std::any_of(g.params.cover.axes.begin(), g.params.cover.axes.end(),
                                [](const auto& a) { return a.empty(); });
        while (!done) {
          Box box;
          for (std::size_t k = 0; k < idx.size(); ++k) box.sides.push_back(g.params.cover.axes[k][idx[k]]);
          g.params.cover.boxes.push_back(std::move(box));
          std::size_t k = idx.size();
          while (k > 0) {
            --k;
            if (++idx[k] < g.params.cover.axes[k].size()) break;
            idx[k] = 0;
            if (k == 0) done = true;
          }
        }
      }
    }
    for (const auto& n : doc.at("nodes")) {
      MapperNode node;
      node.id = n.at("id").get<int>();
      node.box = n.value("box", std::size_t{0});
      node.members = n.at("members").get<std::vector<std::size_t>>();
      node.mean_lens = n.value("mean_lens", std::vector<double>{});
      node.flag_novel = n.value("flag_novel", false);
      if (n.contains("label_hist")) {
        const auto& h = n["label_hist"];
        if (h.is_array()) {
          node.label_hist = h.get<std::vector<std::size_t>>();
        } else {
          node.label_hist.assign(g.params.class_names.size(), 0);
          for (std::size_t c = 0; c < g.params.class_names.size(); ++c)
            node.label_hist[c] = h.value(g.params.class_names[c], std::size_t{0});
        }
      }
      g.nodes.push_back(std::move(node));
    }
    for (const auto& e : doc.at("edges"))
      g.edges.push_back({e.at("source").get<int>(), e.at("target").get<int>(), e.at("shared").get<std::size_t>()});
    return g;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::parse, std::string("graph document: ") + ex.what());
  }
}

std::string export_graph(const MapperGraph& g) { return graph_to_json(g).dump(2) + "\n"; }

MapperGraph parse_graph(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::parse, std::string("graph document: ") + ex.what());
  }
  return graph_from_json(doc);
}

}  // namespace tdamal::mapper
