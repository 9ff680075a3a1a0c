#include "tdamal/tomato.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tdamal/error.hpp"
#include "tdamal/text.hpp"

namespace tdamal::tomato {

namespace {

NeighborGraph build(std::size_t n, std::size_t k, const auto& dist) {
  require(k >= 1, "knn graph: k must be >= 1");
  NeighborGraph g;
  g.n = n;
  g.k = k;
  g.knn.resize(n);
  g.adjacency.resize(n);
  const std::size_t take = n > 0 ? std::min(k, n - 1) : 0;
  std::vector<Neighbor> row;
  for (std::size_t i = 0; i < n; ++i) {
    row.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back({j, dist(i, j)});
    auto closer = [](const Neighbor& a, const Neighbor& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
    };
    std::partial_sort(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take), row.end(), closer);
    g.knn[i].assign(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(take));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& nb : g.knn[i]) {
      g.adjacency[i].push_back(nb);
      g.adjacency[nb.index].push_back({i, nb.distance});
    }
  for (auto& adj : g.adjacency) {
    std::sort(adj.begin(), adj.end(), [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
    adj.erase(std::unique(adj.begin(), adj.end(), [](const Neighbor& a, const Neighbor& b) { return a.index == b.index; }),
              adj.end());
  }
  return g;
}

}  // namespace

NeighborGraph knn_graph(const Matrix& coords, std::size_t k) {
  auto g = build(coords.rows(), k, [&](std::size_t i, std::size_t j) { return euclidean(coords.row(i), coords.row(j)); });
  g.ambient_dim = coords.cols();
  return g;
}

NeighborGraph knn_graph(const embed::DistanceMatrix& d, std::size_t k, std::size_t ambient_dim) {
  auto g = build(d.size(), k, [&](std::size_t i, std::size_t j) { return d(i, j); });
  g.ambient_dim = ambient_dim;
  return g;
}

double unit_ball_volume(std::size_t d) {
  const double half = static_cast<double>(d) / 2.0;
  return std::pow(std::numbers::pi, half) / std::tgamma(half + 1.0);
}

DensityEstimate estimate_density(const NeighborGraph& g, DensityMethod method, double cap) {
  DensityEstimate est;
  est.method = method;
  est.values.assign(g.n, 0.0);
  if (method == DensityMethod::knn_density)
    require(g.ambient_dim > 0, "knn-density needs the ambient dimension of the points");
  for (std::size_t i = 0; i < g.n; ++i) {
    const auto& nbrs = g.knn[i];
    if (nbrs.empty()) continue;
    double value = 0.0;
    if (method == DensityMethod::dtm) {
      double sq = 0.0;
      for (const auto& nb : nbrs) sq += nb.distance * nb.distance;
      sq /= static_cast<double>(nbrs.size());
      value = sq > 0.0 ? 1.0 / std::sqrt(sq) : cap;
    } else {
      const double r = nbrs.back().distance;
      const double denom = static_cast<double>(g.n) * unit_ball_volume(g.ambient_dim) *
                           std::pow(r, static_cast<double>(g.ambient_dim));
      value = r > 0.0 ? static_cast<double>(nbrs.size()) / denom : cap;
    }
    if (!(value < cap)) {
      value = cap;
      est.capped = true;
    }
    est.values[i] = value;
  }
  return est;
}

namespace {

std::vector<std::size_t> density_ranks(const DensityEstimate& f) {
  const std::size_t n = f.values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return f.values[a] != f.values[b] ? f.values[a] > f.values[b] : a < b;
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
  return rank;
}

}  // namespace

std::size_t TomatoResult::kept_count() const {
  return static_cast<std::size_t>(std::count(kept.begin(), kept.end(), true));
}

std::vector<int> TomatoResult::filtered_assignment() const {
  std::vector<int> out = assignment;
  for (int& c : out)
    if (c >= 0 && !kept[static_cast<std::size_t>(c)]) c = -1;
  return out;
}

TomatoResult tomato_cluster(const NeighborGraph& g, const DensityEstimate& f, double delta, OutputFilter filter) {
  require(f.values.size() == g.n, "tomato: density size does not match graph");
  require(delta >= 0.0, "tomato: delta must be non-negative");
  const std::size_t n = g.n;
  const auto& dens = f.values;
  const auto rank = density_ranks(f);
  std::vector<std::size_t> order(n);
  for (std::size_t v = 0; v < n; ++v) order[rank[v]] = v;

  // Union-find whose representative is always the entry's root (its peak).
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };

  TomatoResult result;
  result.delta = delta;
  result.filter = filter;
  std::vector<double> contact(n, std::numeric_limits<double>::infinity());

  for (std::size_t v : order) {
    std::size_t densest = n;
    for (const auto& nb : g.adjacency[v])
      if (rank[nb.index] < rank[v] && (densest == n || rank[nb.index] < rank[densest])) densest = nb.index;
    if (densest == n) continue;  // peak: v opens its own entry
    parent[v] = find(densest);

    for (const auto& nb : g.adjacency[v]) {
      if (rank[nb.index] > rank[v]) continue;
      const std::size_t e = find(nb.index);
      const std::size_t ei = find(v);
      if (e == ei) continue;
      const std::size_t younger = rank[e] > rank[ei] ? e : ei;
      const std::size_t elder = younger == e ? ei : e;
      if (std::min(dens[e], dens[ei]) < dens[v] + delta) {
        parent[younger] = elder;
        result.prominence_diagram.push_back({dens[younger], dens[v], younger});
      } else if (contact[younger] == std::numeric_limits<double>::infinity()) {
        contact[younger] = dens[younger] - dens[v];
      }
    }
  }

  std::vector<int> cluster_of_root(n, -1);
  for (std::size_t v : order) {
    if (find(v) != v) continue;
    cluster_of_root[v] = static_cast<int>(result.roots.size());
    result.roots.push_back(v);
    result.root_density.push_back(dens[v]);
    result.root_prominence.push_back(contact[v]);
    result.kept.push_back(filter == OutputFilter::density ? dens[v] >= delta : contact[v] >= delta);
  }
  result.assignment.resize(n);
  for (std::size_t v = 0; v < n; ++v) result.assignment[v] = cluster_of_root[find(v)];
  return result;
}

std::size_t local_maxima_count(const NeighborGraph& g, const DensityEstimate& f) {
  const auto rank = density_ranks(f);
  std::size_t count = 0;
  for (std::size_t v = 0; v < g.n; ++v) {
    const bool peak = std::none_of(g.adjacency[v].begin(), g.adjacency[v].end(),
                                   [&](const Neighbor& nb) { return rank[nb.index] < rank[v]; });
    if (peak) ++count;
  }
  return count;
}

std::vector<double> sorted_prominences(const TomatoResult& r) {
  std::vector<double> p;
  for (const auto& pair : r.prominence_diagram) p.push_back(pair.prominence());
  std::sort(p.begin(), p.end(), std::greater<>());
  return p;
}

double delta_between_top_two(const TomatoResult& infinite_run) {
  auto p = sorted_prominences(infinite_run);
  p.insert(p.end(), infinite_run.root_density.begin(), infinite_run.root_density.end());
  std::sort(p.begin(), p.end(), std::greater<>());
  if (p.size() >= 3) return (p[1] + p[2]) / 2.0;
  if (p.size() == 2) return p[1] / 2.0;
  return 0.0;
}

std::string assignment_to_csv(const TomatoResult& r) {
  std::string out = "row,cluster\n";
  const auto a = r.filtered_assignment();
  for (std::size_t v = 0; v < a.size(); ++v) out += std::to_string(v) + "," + std::to_string(a[v]) + "\n";
  return out;
}

std::string prominence_to_csv(const TomatoResult& r) {
  std::string out = "dim,birth,death\n";
  for (const auto& p : r.prominence_diagram) out += "0," + format_real(p.birth) + "," + format_real(p.death) + "\n";
  for (double d : r.root_density) out += "0," + format_real(d) + ",-inf\n";
  return out;
}

}  // namespace tdamal::tomato
