#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tdamal/error.hpp"
#include "tdamal/persistence.hpp"

using namespace tdamal;
using namespace tdamal::persistence;
using complex::Filtration;
using complex::Simplex;

namespace {

Filtration rips_of(const Matrix& x, int max_dim = 2) {
  return complex::rips_filtration(embed::distance_matrix(x), max_dim);
}

Matrix square() { return Matrix::from_rows({{0, 0}, {1, 0}, {0, 1}, {1, 1}}); }

Simplex make(std::initializer_list<std::uint32_t> v, double value) {
  Simplex s;
  s.size = static_cast<std::uint8_t>(v.size());
  std::copy(v.begin(), v.end(), s.vertices.begin());
  s.value = value;
  return s;
}

Filtration triangle(bool filled) {
  Filtration f;
  f.n_points = 3;
  f.max_dim = filled ? 2 : 1;
  f.simplices = {make({0}, 0), make({1}, 0), make({2}, 0), make({0, 1}, 1), make({0, 2}, 1), make({1, 2}, 1)};
  if (filled) f.simplices.push_back(make({0, 1, 2}, 1));
  return f;
}

}  // namespace

TEST(Diagram, TwoPoints) {
  const auto dg = compute_diagram(rips_of(Matrix::from_rows({{0}, {1}})));
  const auto h0 = dg.in_dim(0);
  ASSERT_EQ(h0.size(), 2u);
  EXPECT_EQ(h0[0], (PersistencePoint{0, 1, 0}));
  EXPECT_TRUE(h0[1].essential());
}

TEST(Diagram, UnitSquare) {
  const auto dg = compute_diagram(rips_of(square()));
  const auto h1 = dg.in_dim(1);
  ASSERT_EQ(h1.size(), 1u);
  EXPECT_NEAR(h1[0].birth, 1.0, 1e-6);
  EXPECT_NEAR(h1[0].death, std::sqrt(2.0), 1e-6);
  const auto h0 = dg.in_dim(0);
  ASSERT_EQ(h0.size(), 4u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(h0[static_cast<std::size_t>(i)], (PersistencePoint{0, 1, 0}));
  EXPECT_EQ(h0[3].birth, 0.0);
  EXPECT_TRUE(h0[3].essential());
}

TEST(Diagram, UnitSquareMatchesRankOracle) {
  const auto f = rips_of(square());
  for (double t : {0.0, 0.5, 1.0, 1.2, 1.5})
    for (int dim = 0; dim <= 2; ++dim) EXPECT_EQ(betti_curve(compute_diagram(f), dim, {t})[0], oracle_betti(f, t, dim));
}

TEST(Diagram, EquilateralTriangleHasNoH1) {
  EXPECT_TRUE(compute_diagram(triangle(true)).in_dim(1).empty());
}

TEST(Oracle, HollowAndFilledTriangle) {
  EXPECT_EQ(oracle_betti(triangle(false), 1.0, 0), 1);
  EXPECT_EQ(oracle_betti(triangle(false), 1.0, 1), 1);
  EXPECT_EQ(oracle_betti(triangle(true), 1.0, 0), 1);
  EXPECT_EQ(oracle_betti(triangle(true), 1.0, 1), 0);
}

TEST(Oracle, IsolatedVertices) {
  std::mt19937_64 rng(1);
  const auto x = oracle::uniform_cloud(rng, 5, 2);
  EXPECT_EQ(oracle_betti(rips_of(x), 0.0, 0), 5);
}

TEST(BettiCurve, Examples) {
  const auto two = compute_diagram(rips_of(Matrix::from_rows({{0}, {1}})));
  EXPECT_EQ(betti_curve(two, 0, {0.5, 2.0}), (std::vector<int>{2, 1}));
  EXPECT_EQ(betti_curve(PersistenceDiagram{}, 0, {0.1, 1.0, 5.0}), (std::vector<int>{0, 0, 0}));
  EXPECT_EQ(betti_curve(compute_diagram(rips_of(square())), 1, {1.2}), (std::vector<int>{1}));
}

TEST(Property, OracleEquivalenceOnRandomClouds) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(4, 8), dims(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int cloud = 0; cloud < 200; ++cloud) {
    const auto x = oracle::uniform_cloud(rng, size(rng), dims(rng));
    const auto f = rips_of(x);
    const auto dg = compute_diagram(f);
    double top = 0.0;
    for (const auto& s : f.simplices) top = std::max(top, s.value);
    std::vector<double> grid(10);
    for (auto& t : grid) t = u(rng) * top * 1.1;
    std::sort(grid.begin(), grid.end());
    for (int dim = 0; dim <= 2; ++dim) {
      const auto curve = betti_curve(dg, dim, grid);
      for (std::size_t i = 0; i < grid.size(); ++i)
        ASSERT_EQ(curve[i], oracle_betti(f, grid[i], dim)) << "cloud " << cloud << " dim " << dim << " t " << grid[i];
    }
  }
}

TEST(Property, ReductionOptionsDoNotChangeOutput) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = rips_of(oracle::uniform_cloud(rng, 12, 2));
    const auto base = compute_diagram(f, {false, false});
    EXPECT_EQ(compute_diagram(f, {true, false}), base);
    EXPECT_EQ(compute_diagram(f, {false, true}), base);
    EXPECT_EQ(compute_diagram(f, {true, true}), base);
  }
}

TEST(Property, EssentialH0CountsComponents) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const auto x = oracle::uniform_cloud(rng, 15, 2);
    const double t = 0.05 + 0.01 * trial;
    const auto f = complex::rips_filtration(embed::distance_matrix(x), 2, t);
    EXPECT_EQ(static_cast<int>(compute_diagram(f).essential_count(0)), oracle::components_at(x, t));
  }
}

TEST(Property, BoundarySquaresToZero) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) EXPECT_TRUE(boundary_squares_to_zero(boundary_matrix(rips_of(oracle::uniform_cloud(rng, 10, 3)))));
}

TEST(Property, PermutationInvariance) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = oracle::uniform_cloud(rng, 9, 2);
    std::vector<std::size_t> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_EQ(compute_diagram(rips_of(x)), compute_diagram(rips_of(x.select_rows(perm))));
  }
}

TEST(Property, PointsHaveBirthBelowDeath) {
  std::mt19937_64 rng(11);
  const auto dg = compute_diagram(rips_of(oracle::uniform_cloud(rng, 20, 2)));
  for (const auto& p : dg.points) {
    EXPECT_LT(p.birth, p.death);
    EXPECT_GE(p.birth, 0.0);
  }
}

TEST(Boundary, MalformedFiltrationsRejected) {
  auto f = triangle(true);
  std::swap(f.simplices[0], f.simplices[3]);  // edge before its vertex
  EXPECT_THROW(compute_diagram(f), Error);
  auto g = triangle(false);
  g.simplices.pop_back();  // edge {1,2} missing, then add triangle
  g.simplices.push_back(make({0, 1, 2}, 1));
  EXPECT_THROW(boundary_matrix(g), Error);
  auto h = triangle(false);
  h.simplices[3].value = 0.5;
  h.simplices[0].value = 0.7;  // vertex above its coface
  EXPECT_THROW(boundary_matrix(h), Error);
}

TEST(Csv, RoundTrip) {
  const auto dg = compute_diagram(rips_of(square()));
  const auto text = diagram_to_csv(dg);
  EXPECT_EQ(text.substr(0, 16), "dim,birth,death\n");
  EXPECT_NE(text.find("1,1.0,1.414213"), std::string::npos);
  EXPECT_NE(text.find("0,0.0,inf"), std::string::npos);
  EXPECT_EQ(parse_diagram_csv(text), dg);
  EXPECT_THROW(parse_diagram_csv("dim,birth,death\n0,a,1\n"), Error);
}
