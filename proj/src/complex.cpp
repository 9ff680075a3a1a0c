#include "tdamal/complex.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "tdamal/error.hpp"
#include "tdamal/text.hpp"

namespace tdamal::complex {

bool filtration_less(const Simplex& a, const Simplex& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.size != b.size) return a.size < b.size;
  return std::lexicographical_compare(a.vertices.begin(), a.vertices.begin() + a.size, b.vertices.begin(),
                                      b.vertices.begin() + b.size);
}

Filtration rips_filtration(const embed::DistanceMatrix& d, int max_dim, double threshold) {
  require(max_dim >= 0 && max_dim <= 2, "rips: max_dim must be 0, 1 or 2");
  const std::size_t n = d.size();
  require(n < (1u << 21), "rips: too many points");

  Filtration f;
  f.n_points = n;
  f.max_dim = max_dim;
  f.threshold = threshold;

  auto& out = f.simplices;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{static_cast<std::uint32_t>(i), 0, 0}, 1, 0.0});

  if (max_dim >= 1) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (d(i, j) <= threshold)
          out.push_back({{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 0}, 2, d(i, j)});
  }
  if (max_dim >= 2) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dij = d(i, j);
        if (dij > threshold) continue;
        for (std::size_t k = j + 1; k < n; ++k) {
          const double diam = std::max({dij, d(i, k), d(j, k)});
          if (diam <= threshold)
            out.push_back({{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                            static_cast<std::uint32_t>(k)},
                           3,
                           diam});
        }
      }
  }
  std::sort(out.begin(), out.end(), filtration_less);
  return f;
}

std::string filtration_to_text(const Filtration& f) {
  std::string out;
  for (const auto& s : f.simplices) {
    out += format_real(s.value);
    for (auto v : s.verts()) {
      out.push_back(' ');
      out += std::to_string(v);
    }
    out.push_back('\n');
  }
  return out;
}

std::vector<std::size_t> maxmin_order(const embed::DistanceMatrix& d, std::size_t k, std::size_t start) {
  const std::size_t n = d.size();
  require(k >= 1, "subsample size must be >= 1");
  require(k <= n, "subsample size k=" + std::to_string(k) + " exceeds point count " + std::to_string(n));
  require(start < n, "subsample start index out of range");

  std::vector<std::size_t> chosen{start};
  std::vector<double> cover(d.row(start).begin(), d.row(start).end());
  std::vector<char> taken(n, 0);
  taken[start] = 1;
  while (chosen.size() < k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!taken[i] && (best == n || cover[i] > cover[best])) best = i;
    chosen.push_back(best);
    taken[best] = 1;
    for (std::size_t i = 0; i < n; ++i) cover[i] = std::min(cover[i], d(best, i));
  }
  return chosen;
}

Subsample maxmin_subsample_from(const embed::DistanceMatrix& d, std::size_t k, std::size_t start) {
  Subsample s;
  s.indices = maxmin_order(d, k, start);
  s.distances = d.restrict_to(s.indices);
  return s;
}

Subsample maxmin_subsample(const embed::DistanceMatrix& d, std::size_t k, std::uint64_t seed) {
  require(d.size() >= 1, "subsample of an empty point set");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, d.size() - 1);
  return maxmin_subsample_from(d, k, pick(rng));
}

Subsample random_subsample(const embed::DistanceMatrix& d, std::size_t k, std::uint64_t seed) {
  require(k >= 1 && k <= d.size(), "subsample size must lie in [1, n]");
  std::vector<std::size_t> all(d.size());
  std::iota(all.begin(), all.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(k);
  std::sort(all.begin(), all.end());
  Subsample s;
  s.indices = std::move(all);
  s.distances = d.restrict_to(s.indices);
  return s;
}

}  // namespace tdamal::complex
