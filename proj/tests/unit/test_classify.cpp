#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tdamal/classify.hpp"
#include "tdamal/error.hpp"

using namespace tdamal;
using namespace tdamal::classify;

namespace {

struct Split {
  Matrix train_x, test_x;
  std::vector<int> train_y, test_y;
};

Split split_of(const dataio::Dataset& d, std::uint64_t seed) {
  const auto [tr, te] = dataio::split_indices(d, 0.3, seed, true);
  Split s;
  s.train_x = d.features.select_rows(tr);
  s.test_x = d.features.select_rows(te);
  for (auto r : tr) s.train_y.push_back(d.labels[r]);
  for (auto r : te) s.test_y.push_back(d.labels[r]);
  return s;
}

double accuracy(const TrainedModel& m, const Matrix& x, const std::vector<int>& y) {
  const auto p = m.predict(x);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < y.size(); ++i) ok += p[i] == y[i];
  return static_cast<double>(ok) / static_cast<double>(y.size());
}

}  // namespace

TEST(Tree, SeparableDepthOne) {
  const auto x = Matrix::from_rows({{0.1}, {0.2}, {0.4}, {0.6}, {0.8}, {0.9}});
  const std::vector<int> y{0, 0, 0, 1, 1, 1};
  const auto m = train(ModelKind::decision_tree, x, y, {}, 0);
  ASSERT_EQ(m.trees.size(), 1u);
  EXPECT_EQ(m.trees[0].depth(), 1);
  EXPECT_EQ(accuracy(m, x, y), 1.0);
  EXPECT_NEAR(m.trees[0].nodes[0].threshold, 0.5, 1e-12);
}

TEST(Tree, Gini) {
  EXPECT_DOUBLE_EQ(gini(std::vector<std::size_t>{5, 5}), 0.5);
  EXPECT_DOUBLE_EQ(gini(std::vector<std::size_t>{10, 0}), 0.0);
  EXPECT_NEAR(gini(std::vector<std::size_t>{1, 1, 1}), 2.0 / 3.0, 1e-15);
}

TEST(Tree, DepthLimitRespected) {
  const auto d = dataio::synth_blobs(4, 50, 3, 1.0, 1);
  for (double depth : {1.0, 2.0, 3.0}) {
    const auto m = train(ModelKind::decision_tree, d.features, d.labels, {{"max_depth", depth}}, 0);
    EXPECT_LE(m.trees[0].depth(), static_cast<int>(depth));
  }
}

TEST(Forest, SingleUnbaggedTreeEqualsDecisionTree) {
  const auto d = dataio::synth_blobs(3, 60, 4, 2.0, 2);
  const auto rf = train(ModelKind::random_forest, d.features, d.labels,
                        {{"n_estimators", 1}, {"bootstrap", 0}, {"max_features", 0}}, 5);
  const auto dt = train(ModelKind::decision_tree, d.features, d.labels, {{"max_features", 0}}, 5);
  EXPECT_EQ(rf.predict(d.features), dt.predict(d.features));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  Matrix probe(200, 4);
  for (double& v : probe.data()) v = u(rng);
  EXPECT_EQ(rf.predict(probe), dt.predict(probe));
}

TEST(Forest, NoWorseThanSingleTree) {
  const auto d = dataio::synth_blobs(4, 100, 3, 2.0, 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = split_of(d, seed);
    const auto dt = train(ModelKind::decision_tree, s.train_x, s.train_y, {}, seed);
    const auto rf = train(ModelKind::random_forest, s.train_x, s.train_y, {}, seed);
    EXPECT_GE(accuracy(rf, s.test_x, s.test_y), accuracy(dt, s.test_x, s.test_y) - 0.02) << "seed " << seed;
  }
}

TEST(NaiveBayes, RecoversGeneratingMeans) {
  std::mt19937_64 rng(5);
  const double mu[2][2] = {{-1.0, 2.0}, {3.0, 0.5}};
  const double sigma = 0.8;
  const std::size_t per = 500;
  std::normal_distribution<double> g(0.0, sigma);
  Matrix x(2 * per, 2);
  std::vector<int> y(2 * per);
  for (std::size_t i = 0; i < 2 * per; ++i) {
    y[i] = i < per ? 0 : 1;
    for (std::size_t j = 0; j < 2; ++j) x(i, j) = mu[y[i]][j] + g(rng);
  }
  const auto m = train(ModelKind::gaussian_nb, x, y, {}, 0);
  const double se = sigma / std::sqrt(static_cast<double>(per));
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(m.nb.means(static_cast<std::size_t>(c), j), mu[c][j], 3 * se);
  EXPECT_GT(accuracy(m, x, y), 0.99);
}

TEST(NaiveBayes, ConstantFeatureIsFloored) {
  const auto x = Matrix::from_rows({{1, 0}, {1, 1}, {1, 5}, {1, 6}});
  const std::vector<int> y{0, 0, 1, 1};
  const auto m = train(ModelKind::gaussian_nb, x, y, {}, 0);
  EXPECT_GT(m.nb.variances(0, 0), 0.0);
  EXPECT_EQ(m.predict(x), y);
}

TEST(Logistic, SeparatesBlobs) {
  const auto d = dataio::synth_blobs(3, 60, 2, 6.0, 6);
  const auto m = train(ModelKind::logistic_regression, d.features, d.labels, {{"learning_rate", 0.1}}, 0);
  EXPECT_GT(accuracy(m, d.features, d.labels), 0.95);
  EXPECT_LE(m.logistic.epochs, 500);
}

TEST(Metrics, Formulas) {
  BinaryCounts c;
  c.tp = 90;
  c.fn = 10;
  c.fp = 2;
  c.tn = 98;
  EXPECT_DOUBLE_EQ(c.dr(), 0.9);
  EXPECT_DOUBLE_EQ(c.fpr(), 0.02);
  EXPECT_EQ(BinaryCounts{}.dr(), 0.0);
  // rows true, columns predicted; class 1 benign
  const auto b = binarize({{5, 1, 2}, {3, 10, 1}, {0, 0, 4}}, 1);
  EXPECT_EQ(b.tp, 11u);
  EXPECT_EQ(b.fn, 1u);
  EXPECT_EQ(b.fp, 4u);
  EXPECT_EQ(b.tn, 10u);
}

TEST(Metrics, PerfectPredictor) {
  const auto d = dataio::synth_blobs(3, 40, 2, 20.0, 7);
  const auto m = train(ModelKind::decision_tree, d.features, d.labels, {}, 0);
  const auto r = evaluate(m, d.features, d.labels, 0);
  EXPECT_EQ(r.dr, 1.0);
  EXPECT_EQ(r.fpr, 0.0);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r.per_class_accuracy[i], 1.0);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(r.confusion[i][j], i == j ? 40u : 0u);
  }
}

TEST(Metrics, ScalarsMatchConfusion) {
  const auto d = dataio::synth_blobs(4, 60, 3, 1.5, 8);
  const auto s = split_of(d, 1);
  const auto r = train_and_evaluate(ModelKind::random_forest, s.train_x, s.train_y, s.test_x, s.test_y, {}, 3, 0);
  const auto b = binarize(r.confusion, 0);
  EXPECT_EQ(r.dr, b.dr());
  EXPECT_EQ(r.fpr, b.fpr());
  std::vector<std::size_t> row_sums(4, 0);
  for (int y : s.test_y) ++row_sums[static_cast<std::size_t>(y)];
  for (std::size_t i = 0; i < 4; ++i) {
    std::size_t sum = 0;
    for (auto v : r.confusion[i]) sum += v;
    EXPECT_EQ(sum, row_sums[i]);
  }
  EXPECT_GE(r.train_wall_s, 0.0);
  EXPECT_GT(r.peak_mem_bytes, 0u);
  const auto json = report_metrics_json(r, d.class_names);
  EXPECT_EQ(json["dr"], r.dr);
  EXPECT_FALSE(json.contains("train_cpu_s"));
}

TEST(Metrics, BenignByName) {
  EXPECT_EQ(find_benign_class({"Adware", "BENIGN", "Trojan"}), 1);
  EXPECT_EQ(find_benign_class({"A", "B"}, 1), 1);
}

TEST(Training, Deterministic) {
  const auto d = dataio::synth_blobs(4, 50, 3, 2.0, 9);
  for (auto kind : {ModelKind::decision_tree, ModelKind::random_forest, ModelKind::gaussian_nb,
                    ModelKind::logistic_regression}) {
    const auto a = train(kind, d.features, d.labels, {}, 11);
    const auto b = train(kind, d.features, d.labels, {}, 11);
    EXPECT_EQ(model_to_json(a), model_to_json(b)) << kind_name(kind);
  }
}

TEST(Training, Errors) {
  const auto x = Matrix::from_rows({{1}, {2}, {3}});
  EXPECT_THROW(train(ModelKind::decision_tree, x, std::vector<int>{0, 0, 0}, {}, 0), Error);
  auto bad = x;
  bad(1, 0) = std::nan("");
  EXPECT_THROW(train(ModelKind::decision_tree, bad, std::vector<int>{0, 1, 0}, {}, 0), Error);
  EXPECT_THROW(train(ModelKind::decision_tree, x, std::vector<int>{0, 1}, {}, 0), Error);
  EXPECT_THROW(parse_kind("svm"), Error);
  EXPECT_EQ(parse_kind("rf"), ModelKind::random_forest);
  EXPECT_EQ(parse_hyper("max_depth=3,min_samples_leaf=2"), (Hyper{{"max_depth", 3}, {"min_samples_leaf", 2}}));
}

TEST(Persistence, JsonRoundTrip) {
  const auto d = dataio::synth_blobs(3, 40, 3, 2.0, 10);
  for (auto kind : {ModelKind::decision_tree, ModelKind::random_forest, ModelKind::gaussian_nb,
                    ModelKind::logistic_regression}) {
    const auto m = train(kind, d.features, d.labels, {}, 2);
    const auto text = model_to_json(m);
    const auto back = model_from_json(text);
    EXPECT_EQ(back.predict(d.features), m.predict(d.features)) << kind_name(kind);
    EXPECT_EQ(model_to_json(back), text);
  }
  auto doc = nlohmann::json::parse(model_to_json(train(ModelKind::decision_tree, d.features, d.labels, {}, 0)));
  doc.erase("format_version");
  EXPECT_THROW(model_from_json(doc.dump()), Error);
  EXPECT_THROW(model_from_json("[]"), Error);
}

TEST(Grid, ExpansionOrder) {
  const auto points = expand_grid({{"a", {1, 2}}, {"b", {10, 20, 30}}});
  ASSERT_EQ(points.size(), 6u);
  EXPECT_EQ(points[0], (Hyper{{"a", 1}, {"b", 10}}));
  EXPECT_EQ(points[1], (Hyper{{"a", 1}, {"b", 20}}));
  EXPECT_EQ(points[5], (Hyper{{"a", 2}, {"b", 30}}));
  EXPECT_THROW(expand_grid({}), Error);
}

TEST(Grid, StratifiedFolds) {
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) y.push_back(i % 5 == 0 ? 1 : 0);
  const auto folds = stratified_folds(y, 5, 3);
  for (int f = 0; f < 5; ++f) {
    int pos = 0, total = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
      if (folds[i] == f) ++total, pos += y[i];
    EXPECT_EQ(total, 10);
    EXPECT_EQ(pos, 2);
  }
}

TEST(Grid, SinglePointAndShape) {
  const auto d = dataio::synth_blobs(2, 40, 2, 4.0, 11);
  const auto one = grid_search(ModelKind::decision_tree, {{"max_depth", {3}}}, 4, d, 0);
  EXPECT_EQ(one.best, (Hyper{{"max_depth", 3}}));
  ASSERT_EQ(one.table.size(), 1u);
  const auto lr = grid_search(ModelKind::logistic_regression, {{"learning_rate", {1e-3, 1e-2, 1e-1}}}, 4, d, 0);
  ASSERT_EQ(lr.table.size(), 3u);
  for (const auto& row : lr.table) {
    EXPECT_EQ(row.fold_dr.size(), 4u);
    EXPECT_EQ(row.fold_fpr.size(), 4u);
  }
  EXPECT_THROW(grid_search(ModelKind::decision_tree, {{"max_depth", {3}}}, 1, d, 0), Error);
}

TEST(Grid, ChanceLevelOnUninformativeLabels) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  std::bernoulli_distribution malware(0.7);
  dataio::Dataset d;
  d.features = Matrix(600, 3);
  for (double& v : d.features.data()) v = u(rng);
  d.class_names = {"Benign", "Malware"};
  d.feature_names = {"a", "b", "c"};
  for (std::size_t i = 0; i < 600; ++i) d.labels.push_back(malware(rng) ? 1 : 0);
  const auto r = grid_search(ModelKind::decision_tree, {{"max_depth", {0}}}, 5, d, 0);
  EXPECT_NEAR(r.table[0].mean_dr, 0.7, 0.1);
}
