#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "tdamal/complex.hpp"

namespace tdamal::persistence {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

struct PersistencePoint {
  double birth = 0.0;
  double death = infinity;
  int dim = 0;

  bool essential() const noexcept { return death == infinity; }
  double lifetime() const noexcept { return death - birth; }

  friend bool operator==(const PersistencePoint&, const PersistencePoint&) = default;
};

struct PersistenceDiagram {
  std::vector<PersistencePoint> points;  // sorted by (dim, birth, death)
  int max_dim = 0;

  std::vector<PersistencePoint> in_dim(int dim) const;
  std::size_t essential_count(int dim) const;
  /// Restores the canonical point order.
  void sort();

  friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

/// Z/2 boundary columns in filtration order; each column lists the
/// filtration indices of the codimension-1 faces, ascending.
struct BoundaryMatrix {
  std::vector<std::vector<std::uint32_t>> columns;
  std::vector<int> dims;
};

/// Throws Error(invalid_argument) if a face is missing, appears after its
/// coface, or carries a larger value.
BoundaryMatrix boundary_matrix(const complex::Filtration& f);

/// True when the boundary of every column's boundary vanishes over Z/2.
bool boundary_squares_to_zero(const BoundaryMatrix& m);

struct ReductionOptions {
  bool union_find_h0 = true;  // H0 by union-find instead of reducing edge columns
  bool clearing = true;       // skip columns already known to be zero
};

/// Standard column reduction over Z/2, highest dimension first with
/// clearing. Pairs with birth == death are dropped; unpaired creators
/// become essential points with death = infinity.
PersistenceDiagram compute_diagram(const complex::Filtration& f, const ReductionOptions& options = {});

/// Number of points of dimension `dim` alive at each grid value (birth <= t < death).
std::vector<int> betti_curve(const PersistenceDiagram& dg, int dim, const std::vector<double>& grid);

/// Betti number of the subcomplex {value <= t} by dense rank computation over Z/2:
/// beta_j = (#j-simplices - rank d_j) - rank d_(j+1). Meant for small complexes.
int oracle_betti(const complex::Filtration& f, double t, int dim);

/// CSV `dim,birth,death` with `inf` for essential deaths.
std::string diagram_to_csv(const PersistenceDiagram& dg);
PersistenceDiagram parse_diagram_csv(std::string_view text);

}  // namespace tdamal::persistence
