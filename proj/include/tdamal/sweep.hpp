#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdamal/classify.hpp"
#include "tdamal/dataio.hpp"
#include "tdamal/diagram.hpp"

namespace tdamal::classify {

enum class FeatureMethod { raw, pca, phfeat };

FeatureMethod parse_feature_method(std::string_view name);
std::string feature_method_name(FeatureMethod m);

/// Noise-robustness evaluation matrix.
///
/// Protocol per alpha: min-max scale the raw table, add noise to every
/// feature, derive the feature block (PCA and local diagrams are fitted on
/// the whole noised table without labels), then train on a stratified split
/// that is fixed across alphas and score on the held-out rows.
struct SweepOptions {
  std::vector<ModelKind> models{ModelKind::decision_tree, ModelKind::random_forest};
  std::vector<FeatureMethod> features{FeatureMethod::raw, FeatureMethod::pca, FeatureMethod::phfeat};
  std::vector<double> alphas{0.0, 0.001, 0.01, 0.1, 1.0};
  dataio::NoiseSpec noise;  // alpha is overwritten per cell
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  std::optional<int> benign_class;
  std::map<ModelKind, Hyper> hyper;
  std::size_t pca_components = 2;
  diagram::LocalFeatureOptions local;
};

struct SweepCell {
  ModelKind model;
  FeatureMethod features;
  double alpha = 0.0;
  EvalReport report;
  double feature_cpu_s = 0.0;
  double feature_wall_s = 0.0;
};

struct SweepResult {
  std::vector<std::string> class_names;
  int benign_class = 0;
  std::vector<SweepCell> cells;  // alpha-major, then feature method, then model

  const SweepCell* find(ModelKind m, FeatureMethod f, double alpha) const;
};

/// Feature block of one method for an already scaled and noised table.
Matrix derive_features(const dataio::Dataset& noised, FeatureMethod method, const SweepOptions& opts);

SweepResult run_sweep(const dataio::Dataset& raw, const SweepOptions& opts);

/// Deterministic metrics only.
nlohmann::ordered_json sweep_metrics_json(const SweepResult& r);
nlohmann::ordered_json sweep_timing_json(const SweepResult& r);
/// Fixed-width table: classifier, features, alpha, DR, FPR and, with timing, CPU s, Wall s, Mem MiB.
std::string sweep_table(const SweepResult& r, bool with_timing);

}  // namespace tdamal::classify
