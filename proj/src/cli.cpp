#include "tdamal/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "tdamal/classify.hpp"
#include "tdamal/complex.hpp"
#include "tdamal/dataio.hpp"
#include "tdamal/diagram.hpp"
#include "tdamal/embed.hpp"
#include "tdamal/error.hpp"
#include "tdamal/mapper.hpp"
#include "tdamal/persistence.hpp"
#include "tdamal/serve.hpp"
#include "tdamal/sweep.hpp"
#include "tdamal/text.hpp"
#include "tdamal/tomato.hpp"

namespace tdamal::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::string fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double wall_now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

struct Stage {
  std::string name;
  double cpu_s = 0.0;
  double wall_s = 0.0;
  std::size_t peak_mem_bytes = 0;
};

/// Per-invocation state shared by all subcommands.
class Context {
 public:
  std::string subcommand;
  std::vector<std::string> args;  // replayable argument list
  std::uint64_t seed = 0;
  bool profile = false;
  fs::path out_dir = ".";
  ordered_json summary = ordered_json::object();

  fs::path out(const std::string& name) const {
    const fs::path p(name);
    return p.is_absolute() ? p : out_dir / p;
  }

  std::string read_input(const std::string& path) {
    std::string bytes = read_file(path);
    inputs_.push_back({{"path", path}, {"bytes", bytes.size()}, {"fnv1a64", fnv1a64(bytes)}});
    return bytes;
  }

  dataio::Dataset load_dataset(const std::string& path, const std::string& label) {
    auto d = dataio::parse_dataset(read_input(path), label);
    d.validate();
    return d;
  }

  /// Numeric rows from a dataset (when a label column is named) or a bare numeric table.
  Matrix load_points(const std::string& path, const std::string& label) {
    if (!label.empty()) return load_dataset(path, label).features;
    return dataio::parse_numeric_table(read_input(path));
  }

  void write(const fs::path& path, std::string_view contents) {
    write_file(path, contents);
    outputs_.push_back(path.string());
  }

  template <class F>
  auto timed(const std::string& name, F&& f) {
    const double cpu0 = classify::process_cpu_seconds(), wall0 = wall_now();
    struct Recorder {
      Context* ctx;
      std::string name;
      double cpu0, wall0;
      ~Recorder() {
        ctx->stages_.push_back({name, classify::process_cpu_seconds() - cpu0, wall_now() - wall0,
                                classify::peak_resident_bytes()});
      }
    } rec{this, name, cpu0, wall0};
    return f();
  }

  /// Metadata next to every artifact, plus the optional profile sidecar.
  void finish() {
    ordered_json meta;
    meta["tool"] = "tdamal";
    meta["version"] = version;
    meta["subcommand"] = subcommand;
    meta["args"] = args;
    meta["working_directory"] = fs::current_path().string();
    meta["seed"] = seed;
    meta["inputs"] = inputs_;
    meta["outputs"] = outputs_;
    meta["summary"] = summary;
    const std::string text = meta.dump(2) + "\n";
    for (const auto& o : outputs_) write_file(o + ".meta.json", text);

    if (!profile) return;
    ordered_json stages = ordered_json::array();
    std::fprintf(stderr, "%-24s %9s %9s %9s\n", "stage", "CPU s", "Wall s", "Mem MiB");
    for (const auto& s : stages_) {
      stages.push_back({{"stage", s.name}, {"cpu_s", s.cpu_s}, {"wall_s", s.wall_s}, {"peak_mem_bytes", s.peak_mem_bytes}});
      std::fprintf(stderr, "%-24s %9.3f %9.3f %9.1f\n", s.name.c_str(), s.cpu_s, s.wall_s,
                   static_cast<double>(s.peak_mem_bytes) / (1024.0 * 1024.0));
    }
    if (!outputs_.empty()) write_file(outputs_.front() + ".profile.json", ordered_json{{"stages", stages}}.dump(2) + "\n");
  }

 private:
  ordered_json inputs_ = ordered_json::array();
  std::vector<std::string> outputs_;
  std::vector<Stage> stages_;
};

double parse_number(const std::string& text, const std::string& flag) {
  const auto v = parse_real(text);
  if (!v) fail(ErrorCode::invalid_argument, flag + ": not a number: " + text);
  return *v;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_number(item, flag));
  require(!out.empty(), flag + ": empty list");
  return out;
}

dataio::NoiseMode parse_noise_mode(const std::string& s) {
  if (s == "literal-pdf") return dataio::NoiseMode::literal_pdf;
  if (s == "random-draw") return dataio::NoiseMode::random_draw;
  fail(ErrorCode::invalid_argument, "--mode must be literal-pdf or random-draw");
}

int resolve_benign(const std::string& flag, const std::vector<std::string>& names) {
  if (flag.empty()) return classify::find_benign_class(names);
  for (std::size_t c = 0; c < names.size(); ++c)
    if (to_lower(names[c]) == to_lower(flag)) return static_cast<int>(c);
  const auto idx = parse_real(flag);
  if (idx && *idx >= 0 && *idx < static_cast<double>(names.size()) && *idx == std::floor(*idx))
    return static_cast<int>(*idx);
  fail(ErrorCode::invalid_argument, "--benign-class: no class named " + flag);
}

std::string alpha_tag(double a) { return format_real(a); }

mapper::ClusterEps parse_eps(const std::string& s) {
  if (s == "auto") return std::nullopt;
  const double v = parse_number(s, "--cluster-eps");
  require(v > 0.0, "--cluster-eps must be positive or auto");
  return v;
}

/// "max_depth=2,4,8;min_samples_leaf=1,5"
classify::Grid parse_grid(const std::string& text) {
  classify::Grid g;
  for (const auto& part : split(text, ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    require(eq != std::string::npos, "--grid: expected key=v1,v2,...");
    g[part.substr(0, eq)] = parse_list(part.substr(eq + 1), "--grid");
  }
  return g;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  if (raw_args.empty()) {
    std::cerr << "usage: tdamal [--seed N] [--profile] [--out-dir DIR] <subcommand> [options]\n"
                 "subcommands: prepare noise pca import-embed rips bottleneck mapper tomato phfeat train eval synth "
                 "serve replay\n"
                 "run 'tdamal <subcommand> --help' for options\n";
    return 2;
  }

  Context ctx;
  std::string out_dir;
  if (const char* env = std::getenv(out_dir_env)) out_dir = env;

  CLI::App app{"Topological data analysis toolkit for malware feature tables", "tdamal"};
  app.set_version_flag("--version", version);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", ctx.seed, "Seed for every randomized stage")->default_val(0);
  app.add_flag("--profile", ctx.profile, "Record CPU, wall time and peak memory per stage");
  app.add_option("--out-dir", out_dir, std::string("Output directory (default $") + out_dir_env + " or .)");

  std::map<std::string, std::function<void()>> actions;

  // prepare
  std::string input, label = "Class";
  std::map<std::string, std::string> outs;
  auto* prepare = app.add_subcommand("prepare", "Load a CSV, encode labels, min-max scale features");
  prepare->add_option("--input", input, "Input CSV")->required();
  prepare->add_option("--label", label, "Label column")->capture_default_str();
  prepare->add_option("--out", outs["prepare"] = "prepared.csv", "Scaled CSV")->capture_default_str();
  actions["prepare"] = [&] {
    const auto d = ctx.load_dataset(input, label);
    dataio::ColumnRange range;
    const auto scaled = ctx.timed("scale", [&] { return dataio::minmax_scale(d, range); });
    const auto path = ctx.out(outs.at("prepare"));
    ctx.write(path, dataio::dataset_to_csv(scaled));
    ctx.write(fs::path(path).replace_extension(".scaling.json"), dataio::scaling_sidecar_json(scaled, range));
    ctx.summary["rows"] = scaled.size();
    ctx.summary["classes"] = scaled.class_names;
  };

  // noise
  std::string alphas_text = "0.001,0.01,0.1,1", mode = "literal-pdf", out_prefix;
  double mu = 0.0, sigma = 0.1;
  auto* noise = app.add_subcommand("noise", "Gaussian noise sweep over alpha");
  noise->add_option("--input", input, "Input CSV (normally prepared)")->required();
  noise->add_option("--label", label, "Label column")->capture_default_str();
  noise->add_option("--alpha", alphas_text, "Comma-separated alpha values")->capture_default_str();
  noise->add_option("--mu", mu, "Noise mean")->capture_default_str();
  noise->add_option("--sigma", sigma, "Noise standard deviation")->capture_default_str();
  noise->add_option("--mode", mode, "literal-pdf or random-draw")->capture_default_str();
  out_prefix = "noisy";
  noise->add_option("--out-prefix", out_prefix, "Output name prefix")->capture_default_str();
  actions["noise"] = [&] {
    const auto d = ctx.load_dataset(input, label);
    for (double a : parse_list(alphas_text, "--alpha")) {
      dataio::NoiseSpec spec{mu, sigma, a, parse_noise_mode(mode), ctx.seed};
      const auto noisy = ctx.timed("noise alpha=" + alpha_tag(a), [&] { return dataio::add_noise(d, spec); });
      ctx.write(ctx.out(out_prefix + "_alpha_" + alpha_tag(a) + ".csv"), dataio::dataset_to_csv(noisy));
    }
  };

  // pca
  std::size_t components = 2;
  auto* pca = app.add_subcommand("pca", "Principal component embedding");
  pca->add_option("--input", input, "Input CSV")->required();
  pca->add_option("--label", label, "Label column")->capture_default_str();
  pca->add_option("--components", components, "Number of components")->capture_default_str();
  pca->add_option("--out", outs["pca"] = "pca.csv", "Embedding CSV")->capture_default_str();
  actions["pca"] = [&] {
    const auto d = ctx.load_dataset(input, label);
    const auto model = ctx.timed("pca", [&] { return embed::fit_pca(d.features, components); });
    const auto e = model.transform(d.features);
    ctx.write(ctx.out(outs.at("pca")), embed::embedding_to_csv(e));
    ctx.summary["explained_variance"] = model.explained_variance;
    ctx.summary["rank_deficient"] = model.rank_deficient;
  };

  // import-embed
  std::string embedding_path;
  auto* import_embed = app.add_subcommand("import-embed", "Validate and import an external 2-D embedding");
  import_embed->add_option("--input", input, "Dataset CSV the embedding belongs to")->required();
  import_embed->add_option("--label", label, "Label column")->capture_default_str();
  import_embed->add_option("--embedding", embedding_path, "Embedding CSV (one row per sample)")->required();
  import_embed->add_option("--out", outs["import-embed"] = "embedding.csv", "Normalized embedding CSV")->capture_default_str();
  actions["import-embed"] = [&] {
    const auto d = ctx.load_dataset(input, label);
    const auto e = embed::parse_embedding(ctx.read_input(embedding_path), d.size());
    ctx.write(ctx.out(outs.at("import-embed")), embed::embedding_to_csv(e));
    ctx.summary["rows"] = e.coords.rows();
    ctx.summary["dims"] = e.components;
  };

  // rips
  std::string threshold_text = "inf", subsample_method = "maxmin", filtration_out, rips_label;
  int max_dim = 2;
  std::optional<std::size_t> subsample;
  auto* rips = app.add_subcommand("rips", "Vietoris-Rips persistence diagram");
  rips->add_option("--input", input, "Point CSV (numeric table, or dataset with --label)")->required();
  rips->add_option("--label", rips_label, "Label column when the input is a dataset");
  rips->add_option("--max-dim", max_dim, "Highest simplex dimension (0-2)")->capture_default_str();
  rips->add_option("--threshold", threshold_text, "Largest filtration value")->capture_default_str();
  rips->add_option("--subsample", subsample, "Points kept before building the complex (default min(n, 128))");
  rips->add_option("--subsample-method", subsample_method, "maxmin or random")->capture_default_str();
  rips->add_option("--filtration-out", filtration_out, "Also write the filtration as text");
  rips->add_option("--out", outs["rips"] = "diagram.csv", "Diagram CSV")->capture_default_str();
  actions["rips"] = [&] {
    const Matrix x = ctx.load_points(input, rips_label);
    require(x.rows() > 0, "rips: no points");
    require(max_dim >= 0 && max_dim <= 2, "--max-dim must be 0, 1 or 2");
    require(subsample_method == "maxmin" || subsample_method == "random", "--subsample-method must be maxmin or random");
    auto d = ctx.timed("distances", [&] { return embed::distance_matrix(x); });
    const std::size_t k = subsample.value_or(std::min<std::size_t>(x.rows(), 128));
    require(k >= 1 && k <= x.rows(), "--subsample must lie in [1, n]");
    if (k < x.rows()) {
      auto s = ctx.timed("subsample", [&] {
        return subsample_method == "maxmin" ? complex::maxmin_subsample(d, k, ctx.seed)
                                            : complex::random_subsample(d, k, ctx.seed);
      });
      d = std::move(s.distances);
      ctx.summary["subsample_indices"] = s.indices;
    }
    const double threshold = parse_number(threshold_text, "--threshold");
    const auto f = ctx.timed("filtration", [&] { return complex::rips_filtration(d, max_dim, threshold); });
    const auto dg = ctx.timed("reduction", [&] { return persistence::compute_diagram(f); });
    const auto out = ctx.out(outs.at("rips"));
    ctx.write(out, persistence::diagram_to_csv(dg));
    if (!filtration_out.empty()) ctx.write(ctx.out(filtration_out), complex::filtration_to_text(f));
    ctx.summary["points"] = d.size();
    ctx.summary["simplices"] = f.simplices.size();
    ctx.summary["diagram_points"] = dg.points.size();
    std::cout << dg.points.size() << " diagram points from " << f.simplices.size() << " simplices -> "
              << out.string() << "\n";
  };

  // bottleneck
  std::string diagram_a, diagram_b;
  int bottleneck_dim = -1;
  auto* bottleneck = app.add_subcommand("bottleneck", "Bottleneck distance between two diagram CSVs");
  bottleneck->add_option("--a", diagram_a, "First diagram CSV")->required();
  bottleneck->add_option("--b", diagram_b, "Second diagram CSV")->required();
  bottleneck->add_option("--dim", bottleneck_dim, "Homology dimension (default: 0, 1 and 2)");
  bottleneck->add_option("--out", outs["bottleneck"] = "bottleneck.json", "Result document")->capture_default_str();
  actions["bottleneck"] = [&] {
    const auto a = persistence::parse_diagram_csv(ctx.read_input(diagram_a));
    const auto b = persistence::parse_diagram_csv(ctx.read_input(diagram_b));
    std::vector<int> dims;
    if (bottleneck_dim >= 0)
      dims.push_back(bottleneck_dim);
    else
      dims = {0, 1, 2};
    ordered_json results = ordered_json::array();
    for (int dim : dims) {
      const auto r = ctx.timed("bottleneck H" + std::to_string(dim), [&] { return diagram::bottleneck(a, b, dim); });
      ordered_json pairs = ordered_json::array();
      for (const auto& p : r.certificate.pairs) pairs.push_back({p.a, p.b, format_real(p.cost)});
      results.push_back({{"dim", dim}, {"distance", format_real(r.distance)}, {"matching", pairs}});
      std::cout << "H" << dim << " " << format_real(r.distance) << "\n";
    }
    ctx.write(ctx.out(outs.at("bottleneck")), ordered_json{{"results", results}}.dump(2) + "\n");
  };

  // mapper
  std::string lens = "pca", eps_text = "auto";
  int intervals = 10;
  double overlap = 0.3;
  auto* mapper_cmd = app.add_subcommand("mapper", "Mapper nerve graph document");
  mapper_cmd->add_option("--input", input, "Dataset CSV (normally prepared)")->required();
  mapper_cmd->add_option("--label", label, "Label column")->capture_default_str();
  mapper_cmd->add_option("--lens", lens, "pca or external")->capture_default_str();
  mapper_cmd->add_option("--embedding", embedding_path, "Embedding CSV for --lens external");
  mapper_cmd->add_option("--components", components, "PCA lens components (1 or 2)")->capture_default_str();
  mapper_cmd->add_option("--intervals", intervals, "Intervals per lens dimension")->capture_default_str();
  mapper_cmd->add_option("--overlap", overlap, "Overlap fraction in (0, 1)")->capture_default_str();
  mapper_cmd->add_option("--cluster-eps", eps_text, "Single-linkage cut distance or auto")->capture_default_str();
  mapper_cmd->add_option("--out", outs["mapper"] = "graph.json", "Graph document")->capture_default_str();
  actions["mapper"] = [&] {
    const auto d = ctx.load_dataset(input, label);
    embed::Embedding e;
    std::string descriptor;
    if (lens == "pca") {
      require(embedding_path.empty(), "--embedding conflicts with --lens pca");
      e = ctx.timed("lens", [&] { return embed::pca(d, components); });
      descriptor = "pca";
    } else if (lens == "external") {
      require(!embedding_path.empty(), "--lens external needs --embedding");
      e = embed::parse_embedding(ctx.read_input(embedding_path), d.size());
      descriptor = "external:" + fs::path(embedding_path).filename().string();
    } else {
      fail(ErrorCode::invalid_argument, "--lens must be pca or external");
    }
    const auto cover = mapper::build_cover(e, intervals, overlap);
    const auto g = ctx.timed("mapper", [&] { return mapper::mapper_graph(d, e, cover, parse_eps(eps_text), descriptor); });
    ctx.write(ctx.out(outs.at("mapper")), mapper::export_graph(g));
    ctx.summary["nodes"] = g.nodes.size();
    ctx.summary["edges"] = g.edges.size();
    ctx.summary["components"] = mapper::connected_components(g);
    std::cout << g.nodes.size() << " nodes, " << g.edges.size() << " edges, " << mapper::connected_components(g)
              << " components\n";
  };

  // tomato
  std::size_t k_neighbors = 100;
  std::string density = "dtm", delta_text, filter = "density", diagram_out, tomato_label;
  bool auto_delta = false;
  auto* tomato_cmd = app.add_subcommand("tomato", "ToMATo density-mode clustering");
  tomato_cmd->add_option("--input", input, "Point CSV (numeric table, or dataset with --label)")->required();
  tomato_cmd->add_option("--label", tomato_label, "Label column when the input is a dataset");
  tomato_cmd->add_option("--k", k_neighbors, "Neighbours in the k-NN graph")->capture_default_str();
  tomato_cmd->add_option("--density", density, "dtm or knn-density")->capture_default_str();
  auto* delta_opt = tomato_cmd->add_option("--delta", delta_text, "Merge threshold (a number or inf)");
  auto* auto_opt = tomato_cmd->add_flag("--auto-delta", auto_delta, "Threshold keeping the two most prominent peaks");
  delta_opt->excludes(auto_opt);
  tomato_cmd->add_option("--filter", filter, "Output filter: density or prominence")->capture_default_str();
  diagram_out = "tomato_prominence.csv";
  tomato_cmd->add_option("--diagram-out", diagram_out, "Prominence diagram CSV")->capture_default_str();
  tomato_cmd->add_option("--out", outs["tomato"] = "tomato.csv", "Assignment CSV")->capture_default_str();
  actions["tomato"] = [&] {
    require(!delta_text.empty() || auto_delta, "tomato: give --delta or --auto-delta");
    require(filter == "density" || filter == "prominence", "--filter must be density or prominence");
    require(density == "dtm" || density == "knn-density", "--density must be dtm or knn-density");
    const Matrix x = ctx.load_points(input, tomato_label);
    require(x.rows() >= 2, "tomato: need at least 2 points");
    const auto g = ctx.timed("knn graph", [&] { return tomato::knn_graph(x, k_neighbors); });
    const auto f = tomato::estimate_density(
        g, density == "dtm" ? tomato::DensityMethod::dtm : tomato::DensityMethod::knn_density);
    const auto flt = filter == "density" ? tomato::OutputFilter::density : tomato::OutputFilter::prominence;
    double delta = 0.0;
    if (auto_delta) {
      delta = tomato::delta_between_top_two(tomato::tomato_cluster(g, f, tomato::infinite_delta, flt));
    } else {
      delta = parse_number(delta_text, "--delta");
    }
    const auto r = ctx.timed("tomato", [&] { return tomato::tomato_cluster(g, f, delta, flt); });
    ctx.write(ctx.out(outs.at("tomato")), tomato::assignment_to_csv(r));
    ctx.write(ctx.out(diagram_out), tomato::prominence_to_csv(r));
    ctx.summary["delta"] = format_real(delta);
    ctx.summary["clusters"] = r.cluster_count();
    ctx.summary["kept"] = r.kept_count();
    ctx.summary["density_capped"] = f.capped;
    std::cout << r.cluster_count() << " clusters, " << r.kept_count() << " kept by the " << filter
              << " filter at delta " << format_real(delta) << "\n";
  };

  // phfeat
  int homology_dim = 1;
  std::size_t phfeat_k = 20;
  auto* phfeat = app.add_subcommand("phfeat", "Per-sample local persistence features");
  phfeat->add_option("--input", input, "Dataset CSV (normally prepared)")->required();
  phfeat->add_option("--label", label, "Label column")->capture_default_str();
  phfeat->add_option("--k", phfeat_k, "Neighbours per local cloud")->capture_default_str();
  phfeat->add_option("--max-dim", homology_dim, "Highest homology dimension kept")->capture_default_str();
  phfeat->add_option("--out", outs["phfeat"] = "phfeat.csv", "Feature CSV with the label column")->capture_default_str();
  actions["phfeat"] = [&] {
    const auto d = ctx.load_dataset(input, label);
    diagram::LocalFeatureOptions opts{phfeat_k, homology_dim};
    const auto f = ctx.timed("local diagrams", [&] { return diagram::local_diagram_features(d, opts); });
    ctx.write(ctx.out(outs.at("phfeat")), dataio::dataset_to_csv(d.with_features(f, diagram::feature_names())));
  };

  // train
  std::string model_kind = "random-forest", hyper_text, grid_text, benign_flag;
  int folds = 5;
  auto* train = app.add_subcommand("train", "Train a classifier, optionally after a grid search");
  train->add_option("--input", input, "Training CSV")->required();
  train->add_option("--label", label, "Label column")->capture_default_str();
  train->add_option("--model", model_kind, "decision-tree, random-forest, gaussian-nb or logistic-regression")
      ->capture_default_str();
  auto* hyper_opt = train->add_option("--hyper", hyper_text, "Hyperparameters, e.g. max_depth=8,n_estimators=50");
  auto* grid_opt = train->add_option("--grid", grid_text, "Grid search, e.g. max_depth=2,4,8;min_samples_leaf=1,5");
  hyper_opt->excludes(grid_opt);
  train->add_option("--folds", folds, "Cross-validation folds for --grid")->capture_default_str();
  train->add_option("--benign-class", benign_flag, "Benign class name or index (default: the class named benign)");
  train->add_option("--out", outs["train"] = "model.json", "Model document")->capture_default_str();
  actions["train"] = [&] {
    const auto d = ctx.load_dataset(input, label);
    const auto kind = classify::parse_kind(model_kind);
    classify::Hyper hyper = classify::parse_hyper(hyper_text);
    if (!grid_text.empty()) {
      const int benign = resolve_benign(benign_flag, d.class_names);
      const auto gs = ctx.timed("grid search", [&] {
        return classify::grid_search(kind, parse_grid(grid_text), folds, d, ctx.seed, benign);
      });
      std::string table = "hyper,mean_dr,mean_fpr";
      for (int f = 0; f < folds; ++f) table += ",dr_fold" + std::to_string(f);
      table += "\n";
      for (const auto& row : gs.table) {
        std::vector<std::string> rec{classify::hyper_to_string(row.hyper), format_real(row.mean_dr),
                                     format_real(row.mean_fpr)};
        for (double v : row.fold_dr) rec.push_back(format_real(v));
        table += csv_line(rec);
      }
      ctx.write(fs::path(ctx.out(outs.at("train"))).replace_extension(".cv.csv"), table);
      hyper = gs.best;
      ctx.summary["best"] = classify::hyper_to_string(hyper);
    }
    const auto m = ctx.timed("train", [&] { return classify::train(kind, d.features, d.labels, hyper, ctx.seed); });
    ctx.write(ctx.out(outs.at("train")), classify::model_to_json(m));
  };

  // eval
  std::string models_text = "decision-tree,random-forest", features_text = "raw,pca,phfeat";
  std::string eval_alphas = "0,0.001,0.01,0.1,1";
  std::vector<std::string> hyper_specs;
  double test_fraction = 0.2;
  auto* eval = app.add_subcommand("eval", "Noise-sweep evaluation matrix");
  eval->add_option("--input", input, "Raw dataset CSV")->required();
  eval->add_option("--label", label, "Label column")->capture_default_str();
  eval->add_option("--models", models_text, "Comma-separated classifiers")->capture_default_str();
  eval->add_option("--features", features_text, "Comma-separated feature methods: raw, pca, phfeat")
      ->capture_default_str();
  eval->add_option("--alpha", eval_alphas, "Comma-separated alpha values")->capture_default_str();
  eval->add_option("--mu", mu, "Noise mean")->capture_default_str();
  eval->add_option("--sigma", sigma, "Noise standard deviation")->capture_default_str();
  eval->add_option("--mode", mode, "literal-pdf or random-draw")->capture_default_str();
  eval->add_option("--test-fraction", test_fraction, "Held-out fraction")->capture_default_str();
  eval->add_option("--benign-class", benign_flag, "Benign class name or index");
  eval->add_option("--components", components, "PCA feature components")->capture_default_str();
  eval->add_option("--k", phfeat_k, "Neighbours for local persistence features")->capture_default_str();
  eval->add_option("--hyper", hyper_specs, "Per-model hyperparameters, e.g. random-forest:n_estimators=50");
  eval->add_option("--out", outs["eval"] = "eval.json", "Metrics document")->capture_default_str();
  actions["eval"] = [&] {
    const auto d = ctx.load_dataset(input, label);
    classify::SweepOptions opts;
    opts.models.clear();
    for (const auto& m : split(models_text, ',')) opts.models.push_back(classify::parse_kind(m));
    opts.features.clear();
    for (const auto& f : split(features_text, ',')) opts.features.push_back(classify::parse_feature_method(f));
    opts.alphas = parse_list(eval_alphas, "--alpha");
    opts.noise = {mu, sigma, 0.0, parse_noise_mode(mode), ctx.seed};
    opts.test_fraction = test_fraction;
    opts.seed = ctx.seed;
    opts.benign_class = resolve_benign(benign_flag, d.class_names);
    opts.pca_components = components;
    opts.local.k_neighbors = phfeat_k;
    for (const auto& spec : hyper_specs) {
      const auto colon = spec.find(':');
      require(colon != std::string::npos, "--hyper: expected model:key=value,...");
      opts.hyper[classify::parse_kind(spec.substr(0, colon))] = classify::parse_hyper(spec.substr(colon + 1));
    }
    const auto r = ctx.timed("eval", [&] { return classify::run_sweep(d, opts); });
    const auto path = ctx.out(outs.at("eval"));
    ctx.write(path, classify::sweep_metrics_json(r).dump(2) + "\n");
    ctx.write(fs::path(path).replace_extension(".txt"), classify::sweep_table(r, false));
    if (ctx.profile) write_file(fs::path(path).replace_extension(".timing.json"), classify::sweep_timing_json(r).dump(2) + "\n");
    std::cout << classify::sweep_table(r, ctx.profile);
  };

  // synth
  int n_classes = 4, per_class = 250, dims = 3;
  double separation = 6.0;
  auto* synth = app.add_subcommand("synth", "Synthetic Gaussian blob dataset");
  synth->add_option("--classes", n_classes, "Number of classes")->capture_default_str();
  synth->add_option("--per-class", per_class, "Rows per class")->capture_default_str();
  synth->add_option("--dims", dims, "Feature dimensions")->capture_default_str();
  synth->add_option("--separation", separation, "Distance of each centre from the origin")->capture_default_str();
  synth->add_option("--out", outs["synth"] = "synth.csv", "Dataset CSV")->capture_default_str();
  actions["synth"] = [&] {
    const auto d = ctx.timed("synth", [&] { return dataio::synth_blobs(n_classes, per_class, dims, separation, ctx.seed); });
    ctx.write(ctx.out(outs.at("synth")), dataio::dataset_to_csv(d));
  };

  // serve
  serve::Config serve_cfg;
  double max_body_mb = 64;
  auto* serve_cmd = app.add_subcommand("serve", "Local HTTP service for the Mapper explorer");
  serve_cmd->add_option("--bind", serve_cfg.bind_address, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", serve_cfg.port, "TCP port")->capture_default_str();
  serve_cmd->add_option("--max-body-mb", max_body_mb, "Request body size cap in MiB")->capture_default_str();
  serve_cmd->add_option("--cors-origin", serve_cfg.cors_origin, "Allowed CORS origin")->capture_default_str();
  actions["serve"] = [&] {
    require(max_body_mb > 0, "--max-body-mb must be positive");
    serve_cfg.max_body_bytes = static_cast<std::size_t>(max_body_mb * 1024.0 * 1024.0);
    serve::Service service(serve_cfg);
    serve::run_server(service);
  };

  // replay
  std::string meta_path;
  auto* replay = app.add_subcommand("replay", "Re-run a subcommand from an artifact's metadata record");
  replay->add_option("meta", meta_path, "Path to a .meta.json file")->required();

  std::vector<std::string> reversed(raw_args.rbegin(), raw_args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto chosen = app.get_subcommands().front();
  ctx.subcommand = chosen->get_name();
  try {
    if (ctx.subcommand == "replay") {
      const auto meta = nlohmann::json::parse(read_file(meta_path));
      const auto args = meta.at("args").get<std::vector<std::string>>();
      const fs::path cwd = meta.at("working_directory").get<std::string>();
      const fs::path here = fs::current_path();
      fs::current_path(cwd);
      const int code = run(args);
      fs::current_path(here);
      return code;
    }
    if (!out_dir.empty()) ctx.out_dir = out_dir;
    ctx.args = raw_args;
    const bool has_out_dir = std::any_of(raw_args.begin(), raw_args.end(), [](const std::string& a) {
      return a == "--out-dir" || a.starts_with("--out-dir=");
    });
    if (!has_out_dir && ctx.subcommand != "serve") {
      ctx.args.push_back("--out-dir");
      ctx.args.push_back(ctx.out_dir.string());
    }
    actions.at(ctx.subcommand)();
    ctx.finish();
  } catch (const std::exception& ex) {
    std::cerr << "tdamal " << ctx.subcommand << ": error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}

int run(int argc, char** argv) { return run(std::vector<std::string>(argv + 1, argv + argc)); }

}  // namespace tdamal::cli
