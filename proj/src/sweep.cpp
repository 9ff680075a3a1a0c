#include "tdamal/sweep.hpp"

#include <chrono>
#include <cstdio>

#include "tdamal/embed.hpp"
#include "tdamal/error.hpp"
#include "tdamal/text.hpp"

namespace tdamal::classify {

FeatureMethod parse_feature_method(std::string_view name) {
  const auto n = to_lower(name);
  if (n == "raw") return FeatureMethod::raw;
  if (n == "pca") return FeatureMethod::pca;
  if (n == "phfeat" || n == "persistence" || n == "local-persistence") return FeatureMethod::phfeat;
  fail(ErrorCode::invalid_argument, "unknown feature method: " + std::string(name));
}

std::string feature_method_name(FeatureMethod m) {
  switch (m) {
    case FeatureMethod::raw: return "raw";
    case FeatureMethod::pca: return "pca";
    case FeatureMethod::phfeat: return "phfeat";
  }
  return "unknown";
}

const SweepCell* SweepResult::find(ModelKind m, FeatureMethod f, double alpha) const {
  for (const auto& c : cells)
    if (c.model == m && c.features == f && c.alpha == alpha) return &c;
  return nullptr;
}

Matrix derive_features(const dataio::Dataset& noised, FeatureMethod method, const SweepOptions& opts) {
  switch (method) {
    case FeatureMethod::raw: return noised.features;
    case FeatureMethod::pca: return embed::pca(noised, opts.pca_components).coords;
    case FeatureMethod::phfeat: return diagram::local_diagram_features(noised, opts.local);
  }
  return {};
}

namespace {

double wall_now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

SweepResult run_sweep(const dataio::Dataset& raw, const SweepOptions& opts) {
  require(!opts.models.empty() && !opts.features.empty() && !opts.alphas.empty(), "eval: empty sweep");
  raw.validate();
  SweepResult result;
  result.class_names = raw.class_names;
  result.benign_class = opts.benign_class.value_or(find_benign_class(raw.class_names));
  require(result.benign_class >= 0 && static_cast<std::size_t>(result.benign_class) < raw.class_names.size(),
          "eval: benign class out of range");

  const auto scaled = dataio::minmax_scale(raw);
  const auto [train_rows, test_rows] = dataio::split_indices(scaled, opts.test_fraction, opts.seed, true);
  std::vector<int> train_y, test_y;
  for (auto r : train_rows) train_y.push_back(raw.labels[r]);
  for (auto r : test_rows) test_y.push_back(raw.labels[r]);

  for (double alpha : opts.alphas) {
    dataio::NoiseSpec spec = opts.noise;
    spec.alpha = alpha;
    const auto noised = dataio::add_noise(scaled, spec);
    for (auto method : opts.features) {
      const double cpu0 = process_cpu_seconds(), wall0 = wall_now();
      const Matrix f = derive_features(noised, method, opts);
      const double f_cpu = process_cpu_seconds() - cpu0, f_wall = wall_now() - wall0;
      const Matrix train_x = f.select_rows(train_rows);
      const Matrix test_x = f.select_rows(test_rows);
      for (auto model : opts.models) {
        const auto h = opts.hyper.find(model);
        SweepCell cell{model, method, alpha, {}, f_cpu, f_wall};
        cell.report = train_and_evaluate(model, train_x, train_y, test_x, test_y,
                                         h == opts.hyper.end() ? Hyper{} : h->second, opts.seed, result.benign_class);
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

nlohmann::ordered_json sweep_metrics_json(const SweepResult& r) {
  nlohmann::ordered_json doc;
  doc["class_names"] = r.class_names;
  doc["benign_class"] = r.class_names[static_cast<std::size_t>(r.benign_class)];
  auto rows = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    nlohmann::ordered_json row;
    row["classifier"] = kind_name(c.model);
    row["features"] = feature_method_name(c.features);
    row["alpha"] = c.alpha;
    auto m = report_metrics_json(c.report, r.class_names);
    m.erase("class_names");
    for (auto& [k, v] : m.items()) row[k] = v;
    rows.push_back(std::move(row));
  }
  doc["reports"] = std::move(rows);
  return doc;
}

nlohmann::ordered_json sweep_timing_json(const SweepResult& r) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& c : r.cells) {
    nlohmann::ordered_json row;
    row["classifier"] = kind_name(c.model);
    row["features"] = feature_method_name(c.features);
    row["alpha"] = c.alpha;
    row["feature_cpu_s"] = c.feature_cpu_s;
    row["feature_wall_s"] = c.feature_wall_s;
    const auto timing = report_timing_json(c.report);
    for (const auto& [k, v] : timing.items()) row[k] = v;
    rows.push_back(std::move(row));
  }
  return {{"timing", rows}};
}

std::string sweep_table(const SweepResult& r, bool with_timing) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %-8s %-8s %8s %8s", "classifier", "features", "alpha", "DR", "FPR");
  out += line;
  if (with_timing) {
    std::snprintf(line, sizeof line, " %9s %9s %9s", "CPU s", "Wall s", "Mem MiB");
    out += line;
  }
  out += "\n";
  for (const auto& c : r.cells) {
    std::snprintf(line, sizeof line, "%-20s %-8s %-8s %8.4f %8.4f", kind_name(c.model).c_str(),
                  feature_method_name(c.features).c_str(), format_real(c.alpha).c_str(), c.report.dr, c.report.fpr);
    out += line;
    if (with_timing) {
      std::snprintf(line, sizeof line, " %9.3f %9.3f %9.1f", c.report.train_cpu_s + c.report.infer_cpu_s,
                    c.report.train_wall_s + c.report.infer_wall_s,
                    static_cast<double>(c.report.peak_mem_bytes) / (1024.0 * 1024.0));
      out += line;
    }
    out += "\n";
  }
  return out;
}

}  // namespace tdamal::classify
