#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tdamal/diagram.hpp"
#include "tdamal/error.hpp"

using namespace tdamal;
using namespace tdamal::diagram;

namespace {

PersistenceDiagram make(std::vector<PersistencePoint> points) {
  PersistenceDiagram dg;
  dg.points = std::move(points);
  dg.sort();
  return dg;
}

std::vector<PersistencePoint> random_points(std::mt19937_64& rng, std::size_t max_points, int dim = 0) {
  std::uniform_int_distribution<std::size_t> count(0, max_points);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PersistencePoint> out(count(rng));
  for (auto& p : out) {
    p.birth = u(rng);
    p.death = p.birth + 0.01 + u(rng);
    p.dim = dim;
  }
  return out;
}

PersistenceDiagram rips_diagram(const embed::DistanceMatrix& d) {
  return persistence::compute_diagram(complex::rips_filtration(d, 2));
}

}  // namespace

TEST(Bottleneck, Examples) {
  const auto a = make({{0, 2, 0}});
  EXPECT_EQ(bottleneck(a, a, 0).distance, 0.0);
  EXPECT_EQ(bottleneck(a, make({}), 0).distance, 1.0);
  EXPECT_DOUBLE_EQ(bottleneck(a, make({{0, 2.5, 0}}), 0).distance, 0.5);
  const auto absent = bottleneck(a, a, 1);
  EXPECT_EQ(absent.distance, 0.0);
  EXPECT_TRUE(absent.certificate.pairs.empty());
}

TEST(Bottleneck, EssentialPoints) {
  const auto one = make({{0, persistence::infinity, 0}, {0, 1, 0}});
  const auto shifted = make({{0.25, persistence::infinity, 0}, {0, 1, 0}});
  EXPECT_EQ(bottleneck(one, shifted, 0).distance, 0.25);
  EXPECT_EQ(bottleneck(one, make({{0, 1, 0}}), 0).distance, persistence::infinity);
}

TEST(Bottleneck, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const auto a = random_points(rng, 3), b = random_points(rng, 3);
    const auto r = bottleneck_finite(a, b);
    EXPECT_NEAR(r.distance, oracle::brute_bottleneck(a, b), 1e-12) << "trial " << trial;
  }
}

TEST(Bottleneck, CertificateIsValidMatching) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = make(random_points(rng, 6)), b = make(random_points(rng, 6));
    const auto r = bottleneck(a, b, 0);
    EXPECT_EQ(r.certificate.cost, r.distance);
    const auto pa = a.in_dim(0), pb = b.in_dim(0);
    std::vector<int> seen_a(pa.size()), seen_b(pb.size());
    double worst = 0.0;
    for (const auto& m : r.certificate.pairs) {
      ASSERT_FALSE(m.a < 0 && m.b < 0);
      double c = 0.0;
      if (m.a >= 0 && m.b >= 0) c = linf(pa[static_cast<std::size_t>(m.a)], pb[static_cast<std::size_t>(m.b)]);
      else if (m.a >= 0) c = diagonal_cost(pa[static_cast<std::size_t>(m.a)]);
      else c = diagonal_cost(pb[static_cast<std::size_t>(m.b)]);
      EXPECT_EQ(c, m.cost);
      worst = std::max(worst, c);
      if (m.a >= 0) ++seen_a[static_cast<std::size_t>(m.a)];
      if (m.b >= 0) ++seen_b[static_cast<std::size_t>(m.b)];
    }
    for (int s : seen_a) EXPECT_EQ(s, 1);
    for (int s : seen_b) EXPECT_EQ(s, 1);
    EXPECT_EQ(worst, r.distance);
  }
}

TEST(Bottleneck, MetricAxioms) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = make(random_points(rng, 8)), b = make(random_points(rng, 8)), c = make(random_points(rng, 8));
    const double ab = bottleneck(a, b, 0).distance, ba = bottleneck(b, a, 0).distance;
    EXPECT_EQ(ab, ba);
    EXPECT_EQ(bottleneck(a, a, 0).distance, 0.0);
    EXPECT_LE(bottleneck(a, c, 0).distance, ab + bottleneck(b, c, 0).distance + 1e-9);
  }
}

TEST(Bottleneck, StabilityUnderDistancePerturbation) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  const double delta = 0.05;
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = embed::distance_matrix(oracle::uniform_cloud(rng, 12, 2));
    auto e = d;
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = i + 1; j < d.size(); ++j) e.set(i, j, std::max(0.0, d(i, j) + delta * jitter(rng)));
    const auto da = rips_diagram(d), db = rips_diagram(e);
    for (int dim = 0; dim <= 2; ++dim) EXPECT_LE(bottleneck(da, db, dim).distance, delta + 1e-9) << "dim " << dim;
  }
}

TEST(Vectorize, EntropyOfEqualLifetimes) {
  const auto v = vectorize(make({{0, 1, 0}, {0, 1, 0}}));
  EXPECT_NEAR(v[5], std::log(2.0), 1e-12);
  EXPECT_EQ(v[0], 2.0);
  EXPECT_EQ(v[1], 2.0);
  EXPECT_EQ(v[2], 1.0);
  EXPECT_EQ(vectorize(make({{0.2, 0.7, 1}}))[stats_per_dim + 5], 0.0);
}

TEST(Vectorize, EmptyIsZero) {
  for (double x : vectorize(make({}))) EXPECT_EQ(x, 0.0);
}

TEST(Vectorize, EssentialPointsCountButHaveNoLifetime) {
  const auto v = vectorize(make({{0, 1, 0}, {0.5, persistence::infinity, 0}}));
  EXPECT_EQ(v[0], 2.0);
  EXPECT_EQ(v[1], 1.0);
  EXPECT_EQ(v[3], 0.25);
  EXPECT_EQ(v[4], 1.0);
  EXPECT_EQ(v[5], 0.0);
  EXPECT_EQ(feature_names().size(), feature_length);
  EXPECT_EQ(feature_names()[stats_per_dim], "h1_count");
}

TEST(Vectorize, EntropyScaleInvariantAndNonNegative) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> l(1 + trial % 7);
    for (double& x : l) x = u(rng);
    auto scaled = l;
    for (double& x : scaled) x *= 37.5;
    EXPECT_GE(persistence_entropy(l), 0.0);
    EXPECT_NEAR(persistence_entropy(l), persistence_entropy(scaled), 1e-12);
  }
}

TEST(LocalFeatures, EquilateralNeighbourhood) {
  // k + 1 corners of a regular simplex, all pairwise distances sqrt(2)
  const std::size_t k = 4;
  Matrix x(k + 1, k + 1);
  for (std::size_t i = 0; i <= k; ++i) x(i, i) = 1.0;
  const auto f = local_diagram_features(x, {k, 1});
  for (std::size_t i = 0; i <= k; ++i) {
    EXPECT_EQ(f(i, 0), static_cast<double>(k + 1));
    EXPECT_NEAR(f(i, 1), static_cast<double>(k) * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(f(i, 4), std::sqrt(2.0), 1e-12);
    EXPECT_EQ(f(i, stats_per_dim), 0.0);
  }
}

TEST(LocalFeatures, DuplicatedSamplesMatchTheirTwins) {
  std::mt19937_64 rng(6);
  const auto base = oracle::uniform_cloud(rng, 15, 2);
  std::vector<std::size_t> twice;
  for (std::size_t i = 0; i < 15; ++i) twice.insert(twice.end(), {i, i});
  const auto f = local_diagram_features(base.select_rows(twice), {5, 1});
  for (std::size_t i = 0; i < 15; ++i) {
    for (std::size_t c = 0; c < feature_length; ++c) EXPECT_EQ(f(2 * i, c), f(2 * i + 1, c));
    EXPECT_LE(f(2 * i, 0), 5.0);
  }
}

TEST(LocalFeatures, FarBlobsAreIndependent) {
  std::mt19937_64 rng(7);
  const auto a = oracle::uniform_cloud(rng, 30, 2);
  auto b = oracle::uniform_cloud(rng, 30, 2);
  for (double& v : b.data()) v += 100.0;
  Matrix both(60, 2);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t c = 0; c < 2; ++c) {
      both(i, c) = a(i, c);
      both(30 + i, c) = b(i, c);
    }
  const auto alone = local_diagram_features(a, {10, 1});
  const auto joint = local_diagram_features(both, {10, 1});
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t c = 0; c < feature_length; ++c) EXPECT_EQ(alone(i, c), joint(i, c));
}

TEST(LocalFeatures, Preconditions) {
  std::mt19937_64 rng(8);
  const auto x = oracle::uniform_cloud(rng, 10, 2);
  EXPECT_THROW(local_diagram_features(x, {10, 1}), Error);
  EXPECT_THROW(local_diagram_features(x, {3, 2}), Error);
  EXPECT_EQ(local_diagram_features(x, {9, 0}).rows(), 10u);
}
