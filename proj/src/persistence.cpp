#include "tdamal/persistence.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "tdamal/error.hpp"
#include "tdamal/text.hpp"

namespace tdamal::persistence {

using complex::Filtration;
using complex::Simplex;

std::vector<PersistencePoint> PersistenceDiagram::in_dim(int dim) const {
  std::vector<PersistencePoint> out;
  for (const auto& p : points)
    if (p.dim == dim) out.push_back(p);
  return out;
}

std::size_t PersistenceDiagram::essential_count(int dim) const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [dim](const auto& p) { return p.dim == dim && p.essential(); }));
}

void PersistenceDiagram::sort() {
  std::sort(points.begin(), points.end(), [](const PersistencePoint& a, const PersistencePoint& b) {
    if (a.dim != b.dim) return a.dim < b.dim;
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
  });
}

namespace {

std::uint64_t simplex_key(std::span<const std::uint32_t> verts) {
  std::uint64_t key = 0;
  for (std::size_t i = 0; i < verts.size(); ++i) key |= static_cast<std::uint64_t>(verts[i] + 1) << (21 * i);
  return key;
}

// Symmetric difference of two ascending index lists.
void add_column(std::vector<std::uint32_t>& target, const std::vector<std::uint32_t>& source,
                std::vector<std::uint32_t>& scratch) {
  scratch.clear();
  std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                std::back_inserter(scratch));
  target.swap(scratch);
}

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
};

}  // namespace

BoundaryMatrix boundary_matrix(const Filtration& f) {
  const auto& s = f.simplices;
  std::unordered_map<std::uint64_t, std::uint32_t> index;
  index.reserve(s.size() * 2);

  BoundaryMatrix m;
  m.columns.resize(s.size());
  m.dims.resize(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    const Simplex& sigma = s[j];
    require(sigma.size >= 1 && sigma.size <= 3, "malformed filtration: simplex size out of range");
    for (std::size_t a = 1; a < sigma.size; ++a)
      require(sigma.vertices[a - 1] < sigma.vertices[a], "malformed filtration: vertices not strictly increasing");
    m.dims[j] = sigma.dim();

    if (sigma.size > 1) {
      auto& col = m.columns[j];
      std::array<std::uint32_t, 2> face{};
      for (std::size_t skip = 0; skip < sigma.size; ++skip) {
        std::size_t w = 0;
        for (std::size_t a = 0; a < sigma.size; ++a)
          if (a != skip) face[w++] = sigma.vertices[a];
        const auto it = index.find(simplex_key({face.data(), w}));
        if (it == index.end())
          fail(ErrorCode::invalid_argument, "malformed filtration: face ordering violated at simplex " +
                                                std::to_string(j));
        require(s[it->second].value <= sigma.value, "malformed filtration: face value exceeds coface value");
        col.push_back(it->second);
      }
      std::sort(col.begin(), col.end());
    }
    const bool fresh = index.emplace(simplex_key(sigma.verts()), static_cast<std::uint32_t>(j)).second;
    require(fresh, "malformed filtration: duplicate simplex");
  }
  return m;
}

bool boundary_squares_to_zero(const BoundaryMatrix& m) {
  std::vector<std::uint32_t> acc, scratch;
  for (const auto& col : m.columns) {
    acc.clear();
    for (auto face : col) add_column(acc, m.columns[face], scratch);
    if (!acc.empty()) return false;
  }
  return true;
}

PersistenceDiagram compute_diagram(const Filtration& f, const ReductionOptions& options) {
  const BoundaryMatrix bm = boundary_matrix(f);
  const auto& s = f.simplices;
  const std::size_t n = s.size();
  constexpr std::uint32_t none = std::numeric_limits<std::uint32_t>::max();

  std::vector<std::uint32_t> pivot_of(n, none);  // low row -> reducing column
  std::vector<char> killed(n, 0), negative(n, 0), cleared(n, 0);
  std::vector<std::vector<std::uint32_t>> reduced(n);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;

  int top_dim = 0;
  for (int d : bm.dims) top_dim = std::max(top_dim, d);
  const int lowest_reduced = options.union_find_h0 ? 2 : 1;

  std::vector<std::uint32_t> col, scratch;
  for (int d = top_dim; d >= lowest_reduced; --d) {
    for (std::uint32_t j = 0; j < n; ++j) {
      if (bm.dims[j] != d || cleared[j]) continue;
      col = bm.columns[j];
      while (!col.empty() && pivot_of[col.back()] != none) add_column(col, reduced[pivot_of[col.back()]], scratch);
      if (col.empty()) continue;
      const std::uint32_t low = col.back();
      pivot_of[low] = j;
      killed[low] = 1;
      negative[j] = 1;
      if (options.clearing) cleared[low] = 1;
      pairs.emplace_back(low, j);
      reduced[j] = col;
    }
  }

  if (options.union_find_h0 && top_dim >= 1) {
    UnionFind uf(f.n_points);
    // Component birth: filtration index of its oldest vertex.
    std::vector<std::uint32_t> vertex_index(f.n_points, none);
    for (std::uint32_t j = 0; j < n; ++j)
      if (s[j].size == 1) vertex_index[s[j].vertices[0]] = j;
    std::vector<std::uint32_t> birth = vertex_index;
    for (std::uint32_t j = 0; j < n; ++j) {
      if (s[j].size != 2 || cleared[j]) continue;
      const auto ru = uf.find(s[j].vertices[0]);
      const auto rv = uf.find(s[j].vertices[1]);
      if (ru == rv) continue;
      const bool u_elder = birth[ru] < birth[rv];
      const auto elder = u_elder ? ru : rv;
      const auto younger = u_elder ? rv : ru;
      pairs.emplace_back(birth[younger], j);
      killed[birth[younger]] = 1;
      negative[j] = 1;
      uf.parent[younger] = elder;
    }
  }

  PersistenceDiagram dg;
  dg.max_dim = f.max_dim;
  for (auto [b, d] : pairs) {
    const double birth = s[b].value, death = s[d].value;
    if (birth < death) dg.points.push_back({birth, death, bm.dims[b]});
  }
  for (std::uint32_t j = 0; j < n; ++j)
    if (!negative[j] && !killed[j]) dg.points.push_back({s[j].value, infinity, bm.dims[j]});
  dg.sort();
  return dg;
}

std::vector<int> betti_curve(const PersistenceDiagram& dg, int dim, const std::vector<double>& grid) {
  std::vector<int> out(grid.size(), 0);
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (const auto& p : dg.points)
      if (p.dim == dim && p.birth <= grid[g] && grid[g] < p.death) ++out[g];
  return out;
}

namespace {

// Rank over Z/2 of a dense matrix given as packed bit rows.
int z2_rank(std::vector<std::vector<std::uint64_t>> rows, std::size_t n_cols) {
  int rank = 0;
  std::size_t r0 = 0;
  for (std::size_t c = 0; c < n_cols && r0 < rows.size(); ++c) {
    const std::size_t word = c / 64;
    const std::uint64_t bit = std::uint64_t{1} << (c % 64);
    std::size_t piv = r0;
    while (piv < rows.size() && !(rows[piv][word] & bit)) ++piv;
    if (piv == rows.size()) continue;
    std::swap(rows[piv], rows[r0]);
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (r != r0 && (rows[r][word] & bit))
        for (std::size_t w = 0; w < rows[r].size(); ++w) rows[r][w] ^= rows[r0][w];
    ++r0;
    ++rank;
  }
  return rank;
}

}  // namespace

int oracle_betti(const Filtration& f, double t, int dim) {
  require(dim >= 0, "oracle_betti: negative dimension");
  // Simplices of the subcomplex grouped by dimension, each keyed by its vertex tuple.
  std::vector<std::map<std::vector<std::uint32_t>, std::size_t>> by_dim(4);
  for (const auto& s : f.simplices) {
    if (s.value > t) continue;
    std::vector<std::uint32_t> v(s.verts().begin(), s.verts().end());
    auto& bucket = by_dim[static_cast<std::size_t>(s.dim())];
    const std::size_t next = bucket.size();
    bucket.emplace(std::move(v), next);
  }

  // rank of the boundary map from k-simplices to (k-1)-simplices
  auto boundary_rank = [&](int k) -> int {
    if (k <= 0 || k > 3) return 0;
    const auto& cofaces = by_dim[static_cast<std::size_t>(k)];
    const auto& faces = by_dim[static_cast<std::size_t>(k - 1)];
    if (cofaces.empty() || faces.empty()) return 0;
    const std::size_t words = (faces.size() + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows;
    rows.reserve(cofaces.size());
    for (const auto& [verts, idx] : cofaces) {
      std::vector<std::uint64_t> row(words, 0);
      for (std::size_t skip = 0; skip < verts.size(); ++skip) {
        std::vector<std::uint32_t> face;
        for (std::size_t a = 0; a < verts.size(); ++a)
          if (a != skip) face.push_back(verts[a]);
        const auto it = faces.find(face);
        require(it != faces.end(), "oracle_betti: subcomplex is not closed under faces");
        row[it->second / 64] ^= std::uint64_t{1} << (it->second % 64);
      }
      rows.push_back(std::move(row));
    }
    // rank(A) = rank(A^T): rows here are the columns of the boundary map
    return z2_rank(std::move(rows), faces.size());
  };

  if (dim > 2) return 0;
  const int count = static_cast<int>(by_dim[static_cast<std::size_t>(dim)].size());
  return count - boundary_rank(dim) - boundary_rank(dim + 1);
}

std::string diagram_to_csv(const PersistenceDiagram& dg) {
  std::string out = "dim,birth,death\n";
  for (const auto& p : dg.points)
    out += std::to_string(p.dim) + "," + format_real(p.birth) + "," + format_real(p.death) + "\n";
  return out;
}

PersistenceDiagram parse_diagram_csv(std::string_view text) {
  const CsvTable table = parse_csv(text);
  PersistenceDiagram dg;
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& rec = table[r];
    if (r == 0 && !rec.empty() && !parse_real(rec[0])) continue;  // header
    if (rec.size() != 3) fail(ErrorCode::parse, "diagram CSV: expected 3 fields at line " + std::to_string(r + 1));
    const auto dim = parse_real(rec[0]);
    const auto birth = parse_real(rec[1]);
    const auto death = parse_real(rec[2]);
    if (!dim || !birth || !death) fail(ErrorCode::parse, "diagram CSV: non-numeric field at line " + std::to_string(r + 1));
    dg.points.push_back({*birth, *death, static_cast<int>(*dim)});
    dg.max_dim = std::max(dg.max_dim, static_cast<int>(*dim));
  }
  dg.sort();
  return dg;
}

}  // namespace tdamal::persistence
