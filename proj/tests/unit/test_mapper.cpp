#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "oracles.hpp"
#include "tdamal/error.hpp"
#include "tdamal/mapper.hpp"

using namespace tdamal;
using namespace tdamal::mapper;

namespace {

dataio::Dataset dataset(Matrix x, std::vector<int> labels = {}, std::vector<std::string> names = {"Benign"}) {
  dataio::Dataset d;
  if (labels.empty()) labels.assign(x.rows(), 0);
  d.labels = std::move(labels);
  d.class_names = std::move(names);
  for (std::size_t c = 0; c < x.cols(); ++c) d.feature_names.push_back("f" + std::to_string(c));
  d.features = std::move(x);
  return d;
}

embed::Embedding lens_of(std::vector<double> values) {
  Matrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m(i, 0) = values[i];
  return embed::column_lens(m, 0);
}

bool intersects(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::vector<std::size_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return !out.empty();
}

bool boxes_overlap(const Box& a, const Box& b) {
  for (std::size_t k = 0; k < a.sides.size(); ++k)
    if (a.sides[k].hi < b.sides[k].lo || b.sides[k].hi < a.sides[k].lo) return false;
  return true;
}

std::set<std::pair<int, int>> edge_set(const MapperGraph& g) {
  std::set<std::pair<int, int>> s;
  for (const auto& e : g.edges) s.insert({std::min(e.source, e.target), std::max(e.source, e.target)});
  return s;
}

dataio::Dataset two_blobs(std::size_t per, std::uint64_t seed) {
  std::vector<int> labels;
  auto x = oracle::two_gaussians(per, 0.3, 40.0, seed, labels);
  return dataset(std::move(x), std::move(labels), {"Benign", "Malware"});
}

}  // namespace

TEST(Cover, TwoIntervalExample) {
  const auto c = build_cover(lens_of({0.0, 1.0}), 2, 0.3);
  ASSERT_EQ(c.boxes.size(), 2u);
  EXPECT_NEAR(c.axes[0][0].lo, -0.075, 1e-12);
  EXPECT_NEAR(c.axes[0][0].hi, 0.575, 1e-12);
  EXPECT_NEAR(c.axes[0][1].lo, 0.425, 1e-12);
  EXPECT_NEAR(c.axes[0][1].hi, 1.075, 1e-12);
  EXPECT_NEAR(c.axes[0][0].hi - c.axes[0][1].lo, 0.15, 1e-12);
}

TEST(Cover, SingleIntervalAndCrossProduct) {
  const auto one = build_cover(lens_of({0.0, 0.3, 1.0}), 1, 0.3);
  ASSERT_EQ(one.boxes.size(), 1u);
  for (double v : {0.0, 0.3, 1.0}) EXPECT_TRUE(one.axes[0][0].contains(v));
  std::mt19937_64 rng(1);
  embed::Embedding lens;
  lens.coords = oracle::uniform_cloud(rng, 50, 2);
  lens.components = 2;
  const auto c = build_cover(lens, 3, 0.2);
  EXPECT_EQ(c.boxes.size(), 9u);
  EXPECT_EQ(c.dims, 2u);
}

TEST(Cover, DegenerateLensAndValidation) {
  const auto c = build_cover(lens_of({2.0, 2.0, 2.0}), 5, 0.3);
  EXPECT_EQ(c.boxes.size(), 1u);
  EXPECT_THROW(build_cover(lens_of({0, 1}), 0, 0.3), Error);
  EXPECT_THROW(build_cover(lens_of({0, 1}), 2, 0.0), Error);
  EXPECT_THROW(build_cover(lens_of({0, 1}), 2, 1.0), Error);
}

TEST(Cover, UnionContainsLensImage) {
  std::mt19937_64 rng(2);
  embed::Embedding lens;
  lens.coords = oracle::uniform_cloud(rng, 200, 2);
  lens.components = 2;
  for (int r : {1, 2, 5, 10}) {
    const auto c = build_cover(lens, r, 0.25);
    for (std::size_t i = 0; i < 200; ++i)
      EXPECT_TRUE(std::any_of(c.boxes.begin(), c.boxes.end(), [&](const Box& b) { return b.contains(lens.coords.row(i)); }));
  }
}

TEST(AutoEps, HistogramGap) {
  EXPECT_NEAR(auto_eps(std::vector<double>{0.1, 0.1, 0.1, 1.0}), 0.2, 1e-12);
  EXPECT_EQ(auto_eps(std::vector<double>{}), std::numeric_limits<double>::infinity());
  std::vector<double> dense;
  for (int i = 1; i <= 10; ++i) dense.push_back(0.1 * i);
  EXPECT_EQ(auto_eps(dense), std::numeric_limits<double>::infinity());
}

TEST(SingleLinkage, Examples) {
  const auto x = Matrix::from_rows({{0}, {0.1}, {0.2}, {5}, {5.1}});
  const std::vector<std::size_t> rows{0, 1, 2, 3, 4};
  EXPECT_EQ(single_linkage(x, rows, 1.0), (std::vector<std::vector<std::size_t>>{{0, 1, 2}, {3, 4}}));
  EXPECT_EQ(single_linkage(x, rows, std::nullopt).size(), 2u);
  EXPECT_EQ(single_linkage(x, rows, 0.05).size(), 5u);
}

TEST(Graph, CircleHasOneCycle) {
  const auto circle = oracle::circle(100);
  const auto d = dataset(circle);
  const auto lens = embed::column_lens(circle, 0);
  const auto g = mapper_graph(d, lens, build_cover(lens, 4, 0.3), std::nullopt, "column:0");
  EXPECT_EQ(g.nodes.size(), 6u);
  EXPECT_EQ(g.edges.size(), 6u);
  EXPECT_EQ(first_betti(g), 1);
  EXPECT_EQ(connected_components(g), 1u);
}

TEST(Graph, SingleIntervalIsPlainClustering) {
  const auto d = two_blobs(50, 3);
  const auto lens = embed::column_lens(d.features, 0);
  const auto g = mapper_graph(d, lens, build_cover(lens, 1, 0.3), std::nullopt);
  EXPECT_TRUE(g.edges.empty());
  std::vector<std::size_t> all(d.size());
  std::iota(all.begin(), all.end(), 0);
  const auto clusters = single_linkage(d.features, all, std::nullopt);
  ASSERT_EQ(g.nodes.size(), clusters.size());
  for (std::size_t i = 0; i < clusters.size(); ++i) EXPECT_EQ(g.nodes[i].members, clusters[i]);
}

TEST(Graph, FarBlobsGivePureComponents) {
  const auto d = two_blobs(80, 4);
  const auto lens = embed::column_lens(d.features, 1);
  for (int r : {1, 3, 6}) {
    const auto g = mapper_graph(d, lens, build_cover(lens, r, 0.3), 1.0);
    EXPECT_GE(connected_components(g), 2u);
    for (const auto& n : g.nodes) EXPECT_TRUE(n.label_hist[0] == 0 || n.label_hist[1] == 0);
  }
}

TEST(Graph, NerveIsExact) {
  std::mt19937_64 rng(5);
  const auto x = oracle::uniform_cloud(rng, 300, 3);
  const auto d = dataset(x);
  embed::Embedding lens;
  lens.coords = Matrix(300, 2);
  for (std::size_t i = 0; i < 300; ++i) {
    lens.coords(i, 0) = x(i, 0);
    lens.coords(i, 1) = x(i, 1);
  }
  lens.components = 2;
  const auto cover = build_cover(lens, 5, 0.35);
  const auto g = mapper_graph(d, lens, cover, 0.25);
  ASSERT_GT(g.nodes.size(), 25u);
  ASSERT_LE(g.nodes.size(), 400u);
  const auto edges = edge_set(g);
  std::set<int> ids;
  for (const auto& n : g.nodes) EXPECT_TRUE(ids.insert(n.id).second);
  for (const auto& e : g.edges) EXPECT_GE(e.shared, 1u);
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    for (std::size_t j = i + 1; j < g.nodes.size(); ++j) {
      const auto& a = g.nodes[i];
      const auto& b = g.nodes[j];
      const bool linked = edges.count({std::min(a.id, b.id), std::max(a.id, b.id)}) > 0;
      if (linked) EXPECT_TRUE(intersects(a.members, b.members));
      else if (boxes_overlap(cover.boxes[a.box], cover.boxes[b.box])) EXPECT_FALSE(intersects(a.members, b.members));
    }
}

TEST(Graph, MembersCoverEveryRow) {
  std::mt19937_64 rng(6);
  const auto x = oracle::uniform_cloud(rng, 150, 2);
  const auto d = dataset(x);
  const auto lens = embed::column_lens(x, 0);
  const auto g = mapper_graph(d, lens, build_cover(lens, 7, 0.2), std::nullopt);
  std::set<std::size_t> rows;
  for (const auto& n : g.nodes) {
    EXPECT_TRUE(std::is_sorted(n.members.begin(), n.members.end()));
    rows.insert(n.members.begin(), n.members.end());
  }
  EXPECT_EQ(rows.size(), 150u);
  EXPECT_EQ(*rows.rbegin(), 149u);
}

TEST(Graph, EdgesPersistUnderWiderOverlapWithPinnedClusters) {
  std::mt19937_64 rng(7);
  const auto x = oracle::uniform_cloud(rng, 200, 2);
  const auto d = dataset(x);
  const auto lens = embed::column_lens(x, 0);
  const auto narrow = build_cover(lens, 6, 0.15);
  const auto base = mapper_graph(d, lens, narrow, 0.08);
  std::vector<std::vector<std::vector<std::size_t>>> pinned(narrow.boxes.size());
  for (const auto& n : base.nodes) pinned[n.box].push_back(n.members);

  for (double wider_overlap : {0.3, 0.5, 0.8}) {
    const auto wide = build_cover(lens, 6, wider_overlap);
    auto clusters = pinned;
    for (std::size_t b = 0; b < wide.boxes.size(); ++b) {
      if (clusters[b].empty()) continue;
      std::set<std::size_t> have;
      for (const auto& c : clusters[b]) have.insert(c.begin(), c.end());
      for (std::size_t row : preimage(lens, wide.boxes[b])) {
        if (have.count(row)) continue;
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t c = 0; c < clusters[b].size(); ++c)
          for (std::size_t m : pinned[b][c]) {
            const double dist = euclidean(x.row(row), x.row(m));
            if (dist < best_d) best_d = dist, best = c;
          }
        clusters[b][best].push_back(row);
      }
      for (auto& c : clusters[b]) std::sort(c.begin(), c.end());
    }
    MapperParams params = base.params;
    params.cover = wide;
    const auto g = assemble_graph(d, lens, params, clusters);
    const auto before = edge_set(base), after = edge_set(g);
    EXPECT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end())) << wider_overlap;
  }
}

TEST(Graph, Deterministic) {
  const auto d = two_blobs(60, 8);
  const auto lens = embed::pca(d, 2);
  const auto cover = build_cover(lens, 4, 0.3);
  EXPECT_EQ(mapper_graph(d, lens, cover, std::nullopt), mapper_graph(d, lens, cover, std::nullopt));
}

TEST(Novelty, Rule) {
  const std::vector<std::string> names{"Benign", "Malware"};
  EXPECT_FALSE(is_novel({9, 1}, names));
  EXPECT_TRUE(is_novel({5, 5}, names));
  EXPECT_TRUE(is_novel({1, 1, 4}, {"Benign", "Malware", "unlabeled"}));
}

TEST(Export, RoundTripAndShape) {
  const auto circle = oracle::circle(100);
  const auto d = dataset(circle);
  const auto lens = embed::column_lens(circle, 0);
  const auto g = mapper_graph(d, lens, build_cover(lens, 4, 0.3), std::nullopt, "column:0");
  const auto doc = graph_to_json(g);
  for (const char* key : {"id", "size", "members", "mean_lens", "label_hist", "flag_novel"})
    EXPECT_TRUE(doc["nodes"][0].contains(key)) << key;
  for (const char* key : {"source", "target", "shared"}) EXPECT_TRUE(doc["edges"][0].contains(key)) << key;
  EXPECT_EQ(doc["params"]["lens"], "column:0");
  EXPECT_EQ(parse_graph(export_graph(g)), g);
}

TEST(Export, EmptyAndSingleNode) {
  MapperGraph empty;
  const auto doc = nlohmann::json::parse(export_graph(empty));
  EXPECT_TRUE(doc["nodes"].is_array() && doc["nodes"].empty());
  EXPECT_TRUE(doc["edges"].is_array() && doc["edges"].empty());
  EXPECT_EQ(parse_graph(export_graph(empty)), empty);

  const auto d = dataset(Matrix::from_rows({{0, 0}, {0.1, 0}, {0, 0.1}}), {0, 0, 1}, {"Benign", "Malware"});
  const auto lens = embed::column_lens(d.features, 0);
  const auto g = mapper_graph(d, lens, build_cover(lens, 1, 0.3), std::nullopt);
  ASSERT_EQ(g.nodes.size(), 1u);
  const auto one = nlohmann::json::parse(export_graph(g));
  EXPECT_EQ(one["nodes"][0]["size"], 3);
  EXPECT_EQ(one["nodes"][0]["members"], (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(one["nodes"][0]["label_hist"]["Benign"], 2);
  EXPECT_EQ(one["nodes"][0]["label_hist"]["Malware"], 1);
  EXPECT_THROW(parse_graph("{not json"), Error);
}
