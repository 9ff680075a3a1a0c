#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tdamal/dataio.hpp"
#include "tdamal/matrix.hpp"

namespace tdamal::classify {

enum class ModelKind { decision_tree, random_forest, gaussian_nb, logistic_regression };

ModelKind parse_kind(std::string_view name);
std::string kind_name(ModelKind kind);

/// Hyperparameters by name. Recognised keys:
///   decision-tree / random-forest: max_depth (0 = unlimited), min_samples_leaf,
///     min_samples_split, max_features (0 = all; forest default sqrt),
///     n_estimators, bootstrap (0/1)
///   gaussian-nb: var_smoothing (floor factor on the largest feature variance)
///   logistic-regression: learning_rate, l2, max_epochs, tol
using Hyper = std::map<std::string, double>;

Hyper parse_hyper(std::string_view text);  // "a=1,b=0.5"
std::string hyper_to_string(const Hyper& h);

double gini(std::span<const std::size_t> class_counts);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int prediction = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;
  int predict(std::span<const double> x) const;
  int depth() const;
};

struct GaussianNB {
  Matrix means;      // classes x features
  Matrix variances;  // floored
  std::vector<double> log_prior;  // -inf for classes absent from training
};

struct LogisticModel {
  Matrix weights;  // classes x (features + 1), last column is the bias
  std::vector<char> seen;
  int epochs = 0;
};

struct TrainedModel {
  ModelKind kind = ModelKind::decision_tree;
  int classes = 0;
  std::size_t features = 0;
  std::uint64_t train_seed = 0;
  Hyper hyper;
  std::vector<DecisionTree> trees;
  GaussianNB nb;
  LogisticModel logistic;

  int predict(std::span<const double> x) const;
  std::vector<int> predict(const Matrix& x) const;
};

/// Throws on a single-class training set, NaN features, or misaligned rows.
TrainedModel train(ModelKind kind, const Matrix& features, std::span<const int> labels, const Hyper& hyper,
                   std::uint64_t seed);

std::string model_to_json(const TrainedModel& m);
TrainedModel model_from_json(std::string_view text);

struct BinaryCounts {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
  double dr() const;   // TP / (TP + FN), 0 when undefined
  double fpr() const;  // FP / (FP + TN), 0 when undefined
};

/// Benign versus any other class, read off a confusion matrix.
BinaryCounts binarize(const std::vector<std::vector<std::size_t>>& confusion, int benign_class);

struct EvalReport {
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  double dr = 0.0;
  double fpr = 0.0;
  BinaryCounts counts;
  std::vector<double> per_class_accuracy;
  double train_cpu_s = 0.0, train_wall_s = 0.0;
  double infer_cpu_s = 0.0, infer_wall_s = 0.0;
  std::size_t peak_mem_bytes = 0;
};

/// Scores a model; inference time and peak resident memory are captured here.
EvalReport evaluate(const TrainedModel& m, const Matrix& features, std::span<const int> labels, int benign_class);

/// Train, then evaluate, recording train timing on the report.
EvalReport train_and_evaluate(ModelKind kind, const Matrix& train_x, std::span<const int> train_y,
                              const Matrix& test_x, std::span<const int> test_y, const Hyper& hyper,
                              std::uint64_t seed, int benign_class);

/// Class whose name equals "benign" ignoring case, else `fallback`.
int find_benign_class(const std::vector<std::string>& class_names, int fallback = 0);

/// Deterministic part of a report (no timing fields).
nlohmann::ordered_json report_metrics_json(const EvalReport& r, const std::vector<std::string>& class_names);
nlohmann::ordered_json report_timing_json(const EvalReport& r);

struct CvRow {
  Hyper hyper;
  std::vector<double> fold_dr;
  std::vector<double> fold_fpr;
  double mean_dr = 0.0;
  double mean_fpr = 0.0;
};

struct GridSearchResult {
  Hyper best;
  std::vector<CvRow> table;  // one row per grid point, in grid order
};

using Grid = std::map<std::string, std::vector<double>>;

/// Grid points in cartesian order with the last key varying fastest.
std::vector<Hyper> expand_grid(const Grid& grid);

/// Stratified k-fold: fold of each row, classes dealt round-robin after a seeded shuffle.
std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed);

/// Best point: highest mean DR, then lowest mean FPR, then first in grid order.
GridSearchResult grid_search(ModelKind kind, const Grid& grid, int folds, const dataio::Dataset& data,
                             std::uint64_t seed, std::optional<int> benign_class = std::nullopt);

/// CPU seconds consumed by this process so far.
double process_cpu_seconds();
/// Peak resident set size in bytes (best effort).
std::size_t peak_resident_bytes();

}  // namespace tdamal::classify
