#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tdamal/embed.hpp"

namespace tdamal::complex {

inline constexpr double unbounded = std::numeric_limits<double>::infinity();

/// Vertex, edge or triangle with its filtration value.
struct Simplex {
  std::array<std::uint32_t, 3> vertices{};  // strictly increasing, first `size` used
  std::uint8_t size = 1;
  double value = 0.0;

  int dim() const noexcept { return size - 1; }
  std::span<const std::uint32_t> verts() const noexcept { return {vertices.data(), size}; }

  friend bool operator==(const Simplex&, const Simplex&) = default;
};

/// Total order used by filtrations: value, then dimension, then vertex tuple.
bool filtration_less(const Simplex& a, const Simplex& b);

struct Filtration {
  std::vector<Simplex> simplices;
  std::size_t n_points = 0;
  int max_dim = 0;
  double threshold = unbounded;
};

/// Every simplex of dimension <= max_dim whose diameter is <= threshold.
Filtration rips_filtration(const embed::DistanceMatrix& d, int max_dim, double threshold = unbounded);

/// Line-oriented export: `value v0 [v1 [v2]]`.
std::string filtration_to_text(const Filtration& f);

/// Greedy farthest-point sampling from `start`; ties go to the lower index.
std::vector<std::size_t> maxmin_order(const embed::DistanceMatrix& d, std::size_t k, std::size_t start);

struct Subsample {
  std::vector<std::size_t> indices;
  embed::DistanceMatrix distances;
};

/// Farthest-point subsample whose first point is drawn from `seed`.
Subsample maxmin_subsample(const embed::DistanceMatrix& d, std::size_t k, std::uint64_t seed);
Subsample maxmin_subsample_from(const embed::DistanceMatrix& d, std::size_t k, std::size_t start);
/// Uniform subsample without replacement, indices ascending.
Subsample random_subsample(const embed::DistanceMatrix& d, std::size_t k, std::uint64_t seed);

}  // namespace tdamal::complex
