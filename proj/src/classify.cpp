#include "tdamal/classify.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <numeric>
#include <random>

#include "tdamal/error.hpp"
#include "tdamal/text.hpp"

namespace tdamal::classify {

ModelKind parse_kind(std::string_view name) {
  const auto n = to_lower(name);
  if (n == "decision-tree" || n == "dt" || n == "tree") return ModelKind::decision_tree;
  if (n == "random-forest" || n == "rf" || n == "forest") return ModelKind::random_forest;
  if (n == "gaussian-nb" || n == "nb") return ModelKind::gaussian_nb;
  if (n == "logistic-regression" || n == "lr" || n == "logistic") return ModelKind::logistic_regression;
  fail(ErrorCode::invalid_argument, "unknown model kind: " + std::string(name));
}

std::string kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::decision_tree: return "decision-tree";
    case ModelKind::random_forest: return "random-forest";
    case ModelKind::gaussian_nb: return "gaussian-nb";
    case ModelKind::logistic_regression: return "logistic-regression";
  }
  return "unknown";
}

Hyper parse_hyper(std::string_view text) {
  Hyper h;
  if (text.empty()) return h;
  for (const auto& item : split(text, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::invalid_argument, "hyperparameter without '=': " + item);
    const auto v = parse_real(item.substr(eq + 1));
    if (!v) fail(ErrorCode::invalid_argument, "non-numeric hyperparameter value: " + item);
    h[item.substr(0, eq)] = *v;
  }
  return h;
}

std::string hyper_to_string(const Hyper& h) {
  std::string out;
  for (const auto& [k, v] : h) {
    if (!out.empty()) out.push_back(',');
    out += k + "=" + format_real(v);
  }
  return out;
}

double gini(std::span<const std::size_t> class_counts) {
  const double total = static_cast<double>(std::accumulate(class_counts.begin(), class_counts.end(), std::size_t{0}));
  if (total == 0.0) return 0.0;
  double s = 1.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / total;
    s -= p * p;
  }
  return s;
}

int DecisionTree::predict(std::span<const double> x) const {
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(at)];
    at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(at)].prediction;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return best;
}

namespace {

double hyper_or(const Hyper& h, const std::string& key, double fallback) {
  const auto it = h.find(key);
  return it == h.end() ? fallback : it->second;
}

int argmax_count(const std::vector<std::size_t>& counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

struct TreeConfig {
  int max_depth = 0;
  std::size_t min_samples_leaf = 1;
  std::size_t min_samples_split = 2;
  std::size_t max_features = 0;  // 0 = all
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, int classes, TreeConfig cfg, std::mt19937_64& rng)
      : x_(x), y_(y), classes_(static_cast<std::size_t>(classes)), cfg_(cfg), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  std::vector<std::size_t> counts_of(const std::vector<std::size_t>& rows) const {
    std::vector<std::size_t> c(classes_, 0);
    for (auto r : rows) ++c[static_cast<std::size_t>(y_[r])];
    return c;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t p = x_.cols();
    std::vector<std::size_t> f(p);
    std::iota(f.begin(), f.end(), 0);
    if (cfg_.max_features == 0 || cfg_.max_features >= p) return f;
    for (std::size_t i = 0; i < cfg_.max_features; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, p - 1);
      std::swap(f[i], f[pick(rng_)]);
    }
    f.resize(cfg_.max_features);
    std::sort(f.begin(), f.end());
    return f;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const auto counts = counts_of(rows);
    tree_.nodes[static_cast<std::size_t>(id)].prediction = argmax_count(counts);

    const double parent_gini = gini(counts);
    const std::size_t n = rows.size();
    if (parent_gini == 0.0 || n < cfg_.min_samples_split || n < 2 * cfg_.min_samples_leaf ||
        (cfg_.max_depth > 0 && depth >= cfg_.max_depth))
      return id;

    double best_score = parent_gini;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = rows;
    std::vector<std::size_t> left(classes_), right(classes_);
    for (std::size_t f : candidate_features()) {
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        const double va = x_(a, f), vb = x_(b, f);
        return va != vb ? va < vb : a < b;
      });
      std::fill(left.begin(), left.end(), 0);
      right = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(y_[sorted[i]]);
        ++left[c];
        --right[c];
        const double a = x_(sorted[i], f), b = x_(sorted[i + 1], f);
        if (a == b) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < cfg_.min_samples_leaf || nr < cfg_.min_samples_leaf) continue;
        const double score = (static_cast<double>(nl) * gini(left) + static_cast<double>(nr) * gini(right)) /
                             static_cast<double>(n);
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          const double mid = a + (b - a) / 2.0;
          best_threshold = mid < b ? mid : a;
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<std::size_t> lrows, rrows;
    for (auto r : rows) (x_(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? lrows : rrows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(lrows), depth + 1);
    const int r = grow(std::move(rrows), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Matrix& x_;
  std::span<const int> y_;
  std::size_t classes_;
  TreeConfig cfg_;
  std::mt19937_64& rng_;
  DecisionTree tree_;
};

TreeConfig tree_config(const Hyper& h, std::size_t default_max_features) {
  TreeConfig cfg;
  cfg.max_depth = static_cast<int>(hyper_or(h, "max_depth", 0));
  cfg.min_samples_leaf = static_cast<std::size_t>(std::max(1.0, hyper_or(h, "min_samples_leaf", 1)));
  cfg.min_samples_split = static_cast<std::size_t>(std::max(2.0, hyper_or(h, "min_samples_split", 2)));
  cfg.max_features = static_cast<std::size_t>(hyper_or(h, "max_features", static_cast<double>(default_max_features)));
  return cfg;
}

GaussianNB fit_nb(const Matrix& x, std::span<const int> y, int classes, const Hyper& h) {
  const std::size_t p = x.cols(), c_count = static_cast<std::size_t>(classes);
  GaussianNB nb;
  nb.means = Matrix(c_count, p);
  nb.variances = Matrix(c_count, p);
  nb.log_prior.assign(c_count, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> n_c(c_count, 0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto c = static_cast<std::size_t>(y[r]);
    ++n_c[c];
    for (std::size_t j = 0; j < p; ++j) nb.means(c, j) += x(r, j);
  }
  for (std::size_t c = 0; c < c_count; ++c)
    for (std::size_t j = 0; j < p; ++j)
      if (n_c[c]) nb.means(c, j) /= static_cast<double>(n_c[c]);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto c = static_cast<std::size_t>(y[r]);
    for (std::size_t j = 0; j < p; ++j) {
      const double d = x(r, j) - nb.means(c, j);
      nb.variances(c, j) += d * d;
    }
  }
  // Floor: var_smoothing times the largest overall feature variance.
  double max_var = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double m = 0.0, s = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) m += x(r, j);
    m /= static_cast<double>(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) s += (x(r, j) - m) * (x(r, j) - m);
    max_var = std::max(max_var, s / static_cast<double>(x.rows()));
  }
  double floor = hyper_or(h, "var_smoothing", 1e-9) * max_var;
  if (floor <= 0.0) floor = 1e-12;
  for (std::size_t c = 0; c < c_count; ++c) {
    if (!n_c[c]) continue;
    nb.log_prior[c] = std::log(static_cast<double>(n_c[c]) / static_cast<double>(x.rows()));
    for (std::size_t j = 0; j < p; ++j) nb.variances(c, j) = nb.variances(c, j) / static_cast<double>(n_c[c]) + floor;
  }
  return nb;
}

int predict_nb(const GaussianNB& nb, std::span<const double> x) {
  int best = -1;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < nb.log_prior.size(); ++c) {
    if (!std::isfinite(nb.log_prior[c])) continue;
    double ll = nb.log_prior[c];
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double v = nb.variances(c, j), d = x[j] - nb.means(c, j);
      ll -= 0.5 * (std::log(2.0 * M_PI * v) + d * d / v);
    }
    if (best < 0 || ll > best_ll) {
      best = static_cast<int>(c);
      best_ll = ll;
    }
  }
  return best;
}

void softmax_scores(const LogisticModel& m, std::span<const double> x, std::vector<double>& out) {
  const std::size_t k = m.weights.rows(), p = x.size();
  out.assign(k, 0.0);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    if (!m.seen[c]) {
      out[c] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double z = m.weights(c, p);
    for (std::size_t j = 0; j < p; ++j) z += m.weights(c, j) * x[j];
    out[c] = z;
    top = std::max(top, z);
  }
  double sum = 0.0;
  for (double& z : out) {
    z = std::isfinite(z) ? std::exp(z - top) : 0.0;
    sum += z;
  }
  for (double& z : out) z /= sum;
}

LogisticModel fit_logistic(const Matrix& x, std::span<const int> y, int classes, const Hyper& h) {
  const std::size_t n = x.rows(), p = x.cols(), k = static_cast<std::size_t>(classes);
  const double lr = hyper_or(h, "learning_rate", 0.1);
  const double l2 = hyper_or(h, "l2", 0.0);
  const int max_epochs = static_cast<int>(hyper_or(h, "max_epochs", 500));
  const double tol = hyper_or(h, "tol", 1e-6);
  require(lr > 0.0, "logistic regression: learning_rate must be > 0");

  LogisticModel m;
  m.weights = Matrix(k, p + 1);
  m.seen.assign(k, 0);
  for (int c : y) m.seen[static_cast<std::size_t>(c)] = 1;

  Matrix grad(k, p + 1);
  std::vector<double> prob;
  for (m.epochs = 0; m.epochs < max_epochs;) {
    std::fill(grad.data().begin(), grad.data().end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = x.row(r);
      softmax_scores(m, row, prob);
      for (std::size_t c = 0; c < k; ++c) {
        const double err = prob[c] - (static_cast<std::size_t>(y[r]) == c ? 1.0 : 0.0);
        for (std::size_t j = 0; j < p; ++j) grad(c, j) += err * row[j];
        grad(c, p) += err;
      }
    }
    double norm = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j <= p; ++j) {
        double g = grad(c, j) / static_cast<double>(n);
        if (j < p) g += l2 * m.weights(c, j);
        grad(c, j) = g;
        norm += g * g;
      }
    if (std::sqrt(norm) < tol) break;
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t j = 0; j <= p; ++j) m.weights(c, j) -= lr * grad(c, j);
    ++m.epochs;
  }
  return m;
}

}  // namespace

TrainedModel train(ModelKind kind, const Matrix& features, std::span<const int> labels, const Hyper& hyper,
                   std::uint64_t seed) {
  require(features.rows() == labels.size(), "train: feature rows do not align with labels");
  require(!labels.empty(), "train: empty training set");
  for (double v : features.data()) require(!std::isnan(v), "train: NaN feature value");
  int classes = 0;
  for (int l : labels) {
    require(l >= 0, "train: negative class id");
    classes = std::max(classes, l + 1);
  }
  const bool multi = std::any_of(labels.begin(), labels.end(), [&](int l) { return l != labels[0]; });
  require(multi, "train: single-class training set");

  TrainedModel m;
  m.kind = kind;
  m.classes = classes;
  m.features = features.cols();
  m.train_seed = seed;
  m.hyper = hyper;

  std::vector<std::size_t> all(features.rows());
  std::iota(all.begin(), all.end(), 0);
  switch (kind) {
    case ModelKind::decision_tree: {
      std::mt19937_64 rng(seed);
      TreeBuilder builder(features, labels, classes, tree_config(hyper, 0), rng);
      m.trees.push_back(builder.build(all));
      break;
    }
    case ModelKind::random_forest: {
      const auto n_trees = static_cast<std::size_t>(std::max(1.0, hyper_or(hyper, "n_estimators", 100)));
      const bool bootstrap = hyper_or(hyper, "bootstrap", 1) != 0.0;
      const auto sqrt_p =
          std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(features.cols()))));
      const TreeConfig cfg = tree_config(hyper, sqrt_p);
      for (std::size_t t = 0; t < n_trees; ++t) {
        std::mt19937_64 rng(seed + t);
        std::vector<std::size_t> rows = all;
        if (bootstrap) {
          std::uniform_int_distribution<std::size_t> pick(0, all.size() - 1);
          for (auto& r : rows) r = pick(rng);
        }
        TreeBuilder builder(features, labels, classes, cfg, rng);
        m.trees.push_back(builder.build(std::move(rows)));
      }
      break;
    }
    case ModelKind::gaussian_nb:
      m.nb = fit_nb(features, labels, classes, hyper);
      break;
    case ModelKind::logistic_regression:
      m.logistic = fit_logistic(features, labels, classes, hyper);
      break;
  }
  return m;
}

int TrainedModel::predict(std::span<const double> x) const {
  switch (kind) {
    case ModelKind::decision_tree:
      return trees.front().predict(x);
    case ModelKind::random_forest: {
      std::vector<std::size_t> votes(static_cast<std::size_t>(classes), 0);
      for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict(x))];
      return argmax_count(votes);
    }
    case ModelKind::gaussian_nb:
      return predict_nb(nb, x);
    case ModelKind::logistic_regression: {
      std::vector<double> prob;
      softmax_scores(logistic, x, prob);
      return static_cast<int>(std::max_element(prob.begin(), prob.end()) - prob.begin());
    }
  }
  return 0;
}

std::vector<int> TrainedModel::predict(const Matrix& x) const {
  require(x.cols() == features, "predict: feature count mismatch");
  std::vector<int> out(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) out[r] = predict(x.row(r));
  return out;
}

namespace {

nlohmann::ordered_json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from(const nlohmann::json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  m.data() = j.at("data").get<std::vector<double>>();
  require(m.data().size() == m.rows() * m.cols(), "model document: matrix size mismatch");
  return m;
}

constexpr int model_format_version = 1;

}  // namespace

std::string model_to_json(const TrainedModel& m) {
  nlohmann::ordered_json doc;
  doc["format"] = "tdamal-model";
  doc["format_version"] = model_format_version;
  doc["kind"] = kind_name(m.kind);
  doc["classes"] = m.classes;
  doc["features"] = m.features;
  doc["train_seed"] = m.train_seed;
  doc["hyper"] = m.hyper;
  auto trees = nlohmann::ordered_json::array();
  for (const auto& t : m.trees) {
    nlohmann::ordered_json jt;
    std::vector<int> feature, left, right, prediction;
    std::vector<double> threshold;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      prediction.push_back(n.prediction);
    }
    jt["feature"] = feature;
    jt["threshold"] = threshold;
    jt["left"] = left;
    jt["right"] = right;
    jt["prediction"] = prediction;
    trees.push_back(std::move(jt));
  }
  doc["trees"] = std::move(trees);
  if (m.kind == ModelKind::gaussian_nb) {
    std::vector<double> prior = m.nb.log_prior;
    std::vector<nlohmann::json> prior_json;
    for (double v : prior) prior_json.push_back(std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr));
    doc["nb"] = {{"means", matrix_json(m.nb.means)}, {"variances", matrix_json(m.nb.variances)}, {"log_prior", prior_json}};
  }
  if (m.kind == ModelKind::logistic_regression) {
    std::vector<int> seen(m.logistic.seen.begin(), m.logistic.seen.end());
    doc["logistic"] = {{"weights", matrix_json(m.logistic.weights)}, {"seen", seen}, {"epochs", m.logistic.epochs}};
  }
  return doc.dump(1) + "\n";
}

TrainedModel model_from_json(std::string_view text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.contains("format_version")) fail(ErrorCode::parse, "model document: missing format_version");
    const int version = doc["format_version"].get<int>();
    if (version != model_format_version)
      fail(ErrorCode::parse, "model document: unsupported format_version " + std::to_string(version));
    TrainedModel m;
    m.kind = parse_kind(doc.at("kind").get<std::string>());
    m.classes = doc.at("classes").get<int>();
    m.features = doc.at("features").get<std::size_t>();
    m.train_seed = doc.at("train_seed").get<std::uint64_t>();
    m.hyper = doc.at("hyper").get<Hyper>();
    for (const auto& jt : doc.at("trees")) {
      DecisionTree t;
      const auto feature = jt.at("feature").get<std::vector<int>>();
      const auto threshold = jt.at("threshold").get<std::vector<double>>();
      const auto left = jt.at("left").get<std::vector<int>>();
      const auto right = jt.at("right").get<std::vector<int>>();
      const auto prediction = jt.at("prediction").get<std::vector<int>>();
      for (std::size_t i = 0; i < feature.size(); ++i)
        t.nodes.push_back({feature[i], threshold[i], left[i], right[i], prediction[i]});
      m.trees.push_back(std::move(t));
    }
    if (doc.contains("nb")) {
      m.nb.means = matrix_from(doc["nb"].at("means"));
      m.nb.variances = matrix_from(doc["nb"].at("variances"));
      for (const auto& v : doc["nb"].at("log_prior"))
        m.nb.log_prior.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
    }
    if (doc.contains("logistic")) {
      m.logistic.weights = matrix_from(doc["logistic"].at("weights"));
      for (int s : doc["logistic"].at("seen").get<std::vector<int>>()) m.logistic.seen.push_back(static_cast<char>(s));
      m.logistic.epochs = doc["logistic"].value("epochs", 0);
    }
    return m;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::parse, std::string("model document: ") + ex.what());
  }
}

double BinaryCounts::dr() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
double BinaryCounts::fpr() const { return fp + tn ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0; }

BinaryCounts binarize(const std::vector<std::vector<std::size_t>>& confusion, int benign_class) {
  BinaryCounts b;
  const auto benign = static_cast<std::size_t>(benign_class);
  for (std::size_t t = 0; t < confusion.size(); ++t)
    for (std::size_t p = 0; p < confusion[t].size(); ++p) {
      const std::size_t c = confusion[t][p];
      if (t == benign)
        (p == benign ? b.tn : b.fp) += c;
      else
        (p == benign ? b.fn : b.tp) += c;
    }
  return b;
}

double process_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

std::size_t peak_resident_bytes() {
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
  return static_cast<std::size_t>(usage.ru_maxrss) * 1024;  // ru_maxrss is KiB on Linux
}

namespace {

double wall_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

EvalReport evaluate(const TrainedModel& m, const Matrix& features, std::span<const int> labels, int benign_class) {
  require(features.rows() == labels.size(), "evaluate: feature rows do not align with labels");
  int classes = m.classes;
  for (int l : labels) classes = std::max(classes, l + 1);
  require(benign_class >= 0 && benign_class < classes, "evaluate: benign class out of range");

  EvalReport r;
  const double cpu0 = process_cpu_seconds(), wall0 = wall_seconds();
  const auto pred = m.predict(features);
  r.infer_cpu_s = process_cpu_seconds() - cpu0;
  r.infer_wall_s = wall_seconds() - wall0;
  r.peak_mem_bytes = peak_resident_bytes();

  const auto k = static_cast<std::size_t>(classes);
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < labels.size(); ++i)
    ++r.confusion[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(pred[i])];
  r.counts = binarize(r.confusion, benign_class);
  r.dr = r.counts.dr();
  r.fpr = r.counts.fpr();
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t total = std::accumulate(r.confusion[c].begin(), r.confusion[c].end(), std::size_t{0});
    r.per_class_accuracy.push_back(total ? static_cast<double>(r.confusion[c][c]) / static_cast<double>(total) : 0.0);
  }
  return r;
}

EvalReport train_and_evaluate(ModelKind kind, const Matrix& train_x, std::span<const int> train_y,
                              const Matrix& test_x, std::span<const int> test_y, const Hyper& hyper,
                              std::uint64_t seed, int benign_class) {
  const double cpu0 = process_cpu_seconds(), wall0 = wall_seconds();
  const auto model = train(kind, train_x, train_y, hyper, seed);
  const double train_cpu = process_cpu_seconds() - cpu0, train_wall = wall_seconds() - wall0;
  EvalReport r = evaluate(model, test_x, test_y, benign_class);
  r.train_cpu_s = train_cpu;
  r.train_wall_s = train_wall;
  return r;
}

int find_benign_class(const std::vector<std::string>& class_names, int fallback) {
  for (std::size_t c = 0; c < class_names.size(); ++c)
    if (to_lower(class_names[c]) == "benign") return static_cast<int>(c);
  return fallback;
}

nlohmann::ordered_json report_metrics_json(const EvalReport& r, const std::vector<std::string>& class_names) {
  nlohmann::ordered_json j;
  j["dr"] = r.dr;
  j["fpr"] = r.fpr;
  j["tp"] = r.counts.tp;
  j["fn"] = r.counts.fn;
  j["fp"] = r.counts.fp;
  j["tn"] = r.counts.tn;
  j["class_names"] = class_names;
  j["confusion"] = r.confusion;
  j["per_class_accuracy"] = r.per_class_accuracy;
  return j;
}

nlohmann::ordered_json report_timing_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["train_cpu_s"] = r.train_cpu_s;
  j["train_wall_s"] = r.train_wall_s;
  j["infer_cpu_s"] = r.infer_cpu_s;
  j["infer_wall_s"] = r.infer_wall_s;
  j["peak_mem_bytes"] = r.peak_mem_bytes;
  return j;
}

std::vector<Hyper> expand_grid(const Grid& grid) {
  require(!grid.empty(), "grid search: empty grid");
  for (const auto& [key, values] : grid) require(!values.empty(), "grid search: no values for '" + key + "'");
  std::vector<Hyper> points{Hyper{}};
  for (const auto& [key, values] : grid) {
    std::vector<Hyper> next;
    for (const auto& base : points)
      for (double v : values) {
        Hyper h = base;
        h[key] = v;
        next.push_back(std::move(h));
      }
    points = std::move(next);
  }
  return points;
}

std::vector<int> stratified_folds(std::span<const int> labels, int folds, std::uint64_t seed) {
  require(folds >= 2, "grid search: folds must be >= 2");
  int classes = 0;
  for (int l : labels) classes = std::max(classes, l + 1);
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(classes));
  for (std::size_t r = 0; r < labels.size(); ++r) by_class[static_cast<std::size_t>(labels[r])].push_back(r);
  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), 0);
  int next = 0;
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (auto r : rows) {
      fold[r] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

GridSearchResult grid_search(ModelKind kind, const Grid& grid, int folds, const dataio::Dataset& data,
                             std::uint64_t seed, std::optional<int> benign_class) {
  const auto points = expand_grid(grid);
  const auto fold = stratified_folds(data.labels, folds, seed);
  const int benign = benign_class.value_or(find_benign_class(data.class_names));

  GridSearchResult result;
  for (const auto& hyper : points) {
    CvRow row;
    row.hyper = hyper;
    for (int f = 0; f < folds; ++f) {
      std::vector<std::size_t> tr, te;
      for (std::size_t r = 0; r < data.size(); ++r) (fold[r] == f ? te : tr).push_back(r);
      const auto train_set = data.select_rows(tr);
      const auto test_set = data.select_rows(te);
      const auto report = train_and_evaluate(kind, train_set.features, train_set.labels, test_set.features,
                                             test_set.labels, hyper, seed, benign);
      row.fold_dr.push_back(report.dr);
      row.fold_fpr.push_back(report.fpr);
    }
    row.mean_dr = std::accumulate(row.fold_dr.begin(), row.fold_dr.end(), 0.0) / folds;
    row.mean_fpr = std::accumulate(row.fold_fpr.begin(), row.fold_fpr.end(), 0.0) / folds;
    result.table.push_back(std::move(row));
  }
  const CvRow* best = &result.table.front();
  for (const auto& row : result.table)
    if (row.mean_dr > best->mean_dr || (row.mean_dr == best->mean_dr && row.mean_fpr < best->mean_fpr)) best = &row;
  result.best = best->hyper;
  return result;
}

}  // namespace tdamal::classify
