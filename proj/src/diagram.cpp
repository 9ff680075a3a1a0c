#include "tdamal/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "tdamal/complex.hpp"
#include "tdamal/embed.hpp"
#include "tdamal/error.hpp"

namespace tdamal::diagram {

double linf(const PersistencePoint& p, const PersistencePoint& q) {
  return std::max(std::abs(p.birth - q.birth), std::abs(p.death - q.death));
}

double diagonal_cost(const PersistencePoint& p) { return (p.death - p.birth) / 2.0; }

namespace {

constexpr int unmatched = -1;

// Hopcroft-Karp on an explicit adjacency list; left and right sides have equal size.
class HopcroftKarp {
 public:
  explicit HopcroftKarp(const std::vector<std::vector<int>>& adj)
      : adj_(adj), match_l_(adj.size(), unmatched), match_r_(adj.size(), unmatched), dist_(adj.size()) {}

  std::size_t run() {
    std::size_t size = 0;
    while (bfs())
      for (std::size_t u = 0; u < adj_.size(); ++u)
        if (match_l_[u] == unmatched && dfs(static_cast<int>(u))) ++size;
    return size;
  }

  const std::vector<int>& left_matches() const { return match_l_; }

 private:
  bool bfs() {
    std::queue<int> q;
    bool found = false;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      if (match_l_[u] == unmatched) {
        dist_[u] = 0;
        q.push(static_cast<int>(u));
      } else {
        dist_[u] = inf_;
      }
    }
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj_[static_cast<std::size_t>(u)]) {
        const int w = match_r_[static_cast<std::size_t>(v)];
        if (w == unmatched) {
          found = true;
        } else if (dist_[static_cast<std::size_t>(w)] == inf_) {
          dist_[static_cast<std::size_t>(w)] = dist_[static_cast<std::size_t>(u)] + 1;
          q.push(w);
        }
      }
    }
    return found;
  }

  bool dfs(int u) {
    for (int v : adj_[static_cast<std::size_t>(u)]) {
      const int w = match_r_[static_cast<std::size_t>(v)];
      if (w == unmatched ||
          (dist_[static_cast<std::size_t>(w)] == dist_[static_cast<std::size_t>(u)] + 1 && dfs(w))) {
        match_l_[static_cast<std::size_t>(u)] = v;
        match_r_[static_cast<std::size_t>(v)] = u;
        return true;
      }
    }
    dist_[static_cast<std::size_t>(u)] = inf_;
    return false;
  }

  static constexpr int inf_ = std::numeric_limits<int>::max();
  const std::vector<std::vector<int>>& adj_;
  std::vector<int> match_l_, match_r_, dist_;
};

// Left: A points [0, n) then diagonal copies of B [n, n+m).
// Right: B points [0, m) then diagonal copies of A [m, m+n).
std::vector<std::vector<int>> feasibility_graph(std::span<const PersistencePoint> a,
                                                std::span<const PersistencePoint> b, double r) {
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n + m));
  for (int i = 0; i < n; ++i) {
    auto& row = adj[static_cast<std::size_t>(i)];
    for (int j = 0; j < m; ++j)
      if (linf(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(j)]) <= r) row.push_back(j);
    if (diagonal_cost(a[static_cast<std::size_t>(i)]) <= r) row.push_back(m + i);
  }
  for (int j = 0; j < m; ++j) {
    auto& row = adj[static_cast<std::size_t>(n + j)];
    if (diagonal_cost(b[static_cast<std::size_t>(j)]) <= r) row.push_back(j);
    for (int i = 0; i < n; ++i) row.push_back(m + i);
  }
  return adj;
}

}  // namespace

BottleneckResult bottleneck_finite(std::span<const PersistencePoint> a, std::span<const PersistencePoint> b) {
  for (const auto& p : a) require(!p.essential(), "bottleneck_finite: essential point in first diagram");
  for (const auto& p : b) require(!p.essential(), "bottleneck_finite: essential point in second diagram");
  BottleneckResult result;
  if (a.empty() && b.empty()) return result;

  std::vector<double> candidates{0.0};
  candidates.reserve(a.size() * b.size() + a.size() + b.size() + 1);
  for (const auto& p : a) candidates.push_back(diagonal_cost(p));
  for (const auto& q : b) candidates.push_back(diagonal_cost(q));
  for (const auto& p : a)
    for (const auto& q : b) candidates.push_back(linf(p, q));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const std::size_t full = a.size() + b.size();
  // Matching every point to the diagonal is always feasible at the largest candidate.
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    const auto adj = feasibility_graph(a, b, candidates[mid]);
    if (HopcroftKarp(adj).run() == full)
      hi = mid;
    else
      lo = mid + 1;
  }

  const double r = candidates[lo];
  const auto adj = feasibility_graph(a, b, r);
  HopcroftKarp hk(adj);
  hk.run();
  const auto& match = hk.left_matches();
  const int n = static_cast<int>(a.size()), m = static_cast<int>(b.size());
  auto& cert = result.certificate;
  for (int u = 0; u < n + m; ++u) {
    const int v = match[static_cast<std::size_t>(u)];
    if (u < n && v < m) {
      cert.pairs.push_back({u, v, linf(a[static_cast<std::size_t>(u)], b[static_cast<std::size_t>(v)])});
    } else if (u < n) {
      cert.pairs.push_back({u, unmatched, diagonal_cost(a[static_cast<std::size_t>(u)])});
    } else if (v < m) {
      cert.pairs.push_back({unmatched, v, diagonal_cost(b[static_cast<std::size_t>(v)])});
    }
  }
  for (const auto& p : cert.pairs) cert.cost = std::max(cert.cost, p.cost);
  result.distance = cert.cost;
  return result;
}

BottleneckResult bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b, int dim) {
  const auto pa = a.in_dim(dim);
  const auto pb = b.in_dim(dim);

  std::vector<PersistencePoint> fa, fb;
  std::vector<int> fa_idx, fb_idx;
  std::vector<std::pair<double, int>> ea, eb;  // (birth, index) of essential points
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i].essential()) {
      ea.emplace_back(pa[i].birth, static_cast<int>(i));
    } else {
      fa.push_back(pa[i]);
      fa_idx.push_back(static_cast<int>(i));
    }
  }
  for (std::size_t j = 0; j < pb.size(); ++j) {
    if (pb[j].essential()) {
      eb.emplace_back(pb[j].birth, static_cast<int>(j));
    } else {
      fb.push_back(pb[j]);
      fb_idx.push_back(static_cast<int>(j));
    }
  }

  BottleneckResult result = bottleneck_finite(fa, fb);
  for (auto& p : result.certificate.pairs) {
    if (p.a != unmatched) p.a = fa_idx[static_cast<std::size_t>(p.a)];
    if (p.b != unmatched) p.b = fb_idx[static_cast<std::size_t>(p.b)];
  }

  if (ea.size() != eb.size()) {
    result.distance = std::numeric_limits<double>::infinity();
    result.certificate.cost = result.distance;
    return result;
  }
  std::sort(ea.begin(), ea.end());
  std::sort(eb.begin(), eb.end());
  for (std::size_t k = 0; k < ea.size(); ++k) {
    const double cost = std::abs(ea[k].first - eb[k].first);
    result.certificate.pairs.push_back({ea[k].second, eb[k].second, cost});
    result.certificate.cost = std::max(result.certificate.cost, cost);
  }
  result.distance = result.certificate.cost;
  return result;
}

double persistence_entropy(std::span<const double> lifetimes) {
  double total = 0.0;
  for (double l : lifetimes) total += l;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double l : lifetimes) {
    if (l <= 0.0) continue;
    const double p = l / total;
    h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

DiagramFeatureVector vectorize(const PersistenceDiagram& dg) {
  DiagramFeatureVector v{};
  for (std::size_t k = 0; k < vector_dims; ++k) {
    std::size_t count = 0, finite = 0;
    double total = 0.0, longest = 0.0, birth_sum = 0.0, death_sum = 0.0;
    std::vector<double> lifetimes;
    for (const auto& p : dg.points) {
      if (p.dim != static_cast<int>(k)) continue;
      ++count;
      birth_sum += p.birth;
      if (p.essential()) continue;
      ++finite;
      death_sum += p.death;
      total += p.lifetime();
      longest = std::max(longest, p.lifetime());
      lifetimes.push_back(p.lifetime());
    }
    double* out = v.data() + k * stats_per_dim;
    out[0] = static_cast<double>(count);
    out[1] = total;
    out[2] = longest;
    out[3] = count ? birth_sum / static_cast<double>(count) : 0.0;
    out[4] = finite ? death_sum / static_cast<double>(finite) : 0.0;
    out[5] = persistence_entropy(lifetimes);
  }
  return v;
}

std::vector<std::string> feature_names() {
  static const char* stats[] = {"count", "total_persistence", "max_persistence", "mean_birth", "mean_death", "entropy"};
  std::vector<std::string> names;
  for (std::size_t k = 0; k < vector_dims; ++k)
    for (const char* s : stats) names.push_back("h" + std::to_string(k) + "_" + s);
  return names;
}

Matrix local_diagram_features(const Matrix& x, const LocalFeatureOptions& options) {
  const std::size_t n = x.rows();
  const std::size_t k = options.k_neighbors;
  require(k >= 1, "local diagram features: k_neighbors must be >= 1");
  require(k < n, "local diagram features: k_neighbors=" + std::to_string(k) + " must be below sample count " +
                     std::to_string(n));
  require(options.max_homology_dim >= 0 && options.max_homology_dim <= 1,
          "local diagram features: max_homology_dim must be 0 or 1");

  Matrix out(n, feature_length);
  std::vector<std::pair<double, std::size_t>> dist(n);
  std::vector<std::size_t> local(k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = {j == i ? -1.0 : euclidean(x.row(i), x.row(j)), j};
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k + 1), dist.end());
    for (std::size_t a = 0; a <= k; ++a) local[a] = dist[a].second;  // local[0] == i

    const Matrix pts = x.select_rows(local);
    auto f = complex::rips_filtration(embed::distance_matrix(pts), options.max_homology_dim + 1);
    auto dg = persistence::compute_diagram(f);
    std::erase_if(dg.points, [&](const PersistencePoint& p) { return p.dim > options.max_homology_dim; });
    const auto v = vectorize(dg);
    std::copy(v.begin(), v.end(), out.row(i).begin());
  }
  return out;
}

Matrix local_diagram_features(const dataio::Dataset& d, const LocalFeatureOptions& options) {
  return local_diagram_features(d.features, options);
}

}  // namespace tdamal::diagram
