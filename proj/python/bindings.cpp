#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

#include "tdamal/classify.hpp"
#include "tdamal/complex.hpp"
#include "tdamal/dataio.hpp"
#include "tdamal/diagram.hpp"
#include "tdamal/embed.hpp"
#include "tdamal/error.hpp"
#include "tdamal/mapper.hpp"
#include "tdamal/persistence.hpp"
#include "tdamal/tomato.hpp"

namespace py = pybind11;
using namespace tdamal;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) {
    Matrix m(static_cast<std::size_t>(a.shape(0)), 1);
    std::copy(a.data(), a.data() + a.size(), m.data().begin());
    return m;
  }
  if (a.ndim() != 2) throw py::value_error("expected a 1-D or 2-D array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

Array to_array(const Matrix& m) {
  Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

Array diagram_array(const persistence::PersistenceDiagram& dg) {
  Array out({static_cast<py::ssize_t>(dg.points.size()), py::ssize_t{3}});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < dg.points.size(); ++i) {
    v(i, 0) = dg.points[i].dim;
    v(i, 1) = dg.points[i].birth;
    v(i, 2) = dg.points[i].death;
  }
  return out;
}

persistence::PersistenceDiagram diagram_from(const Array& a) {
  persistence::PersistenceDiagram dg;
  if (a.size() == 0) return dg;
  const Matrix m = to_matrix(a);
  if (m.cols() != 3) throw py::value_error("diagram arrays have columns dim, birth, death");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    dg.points.push_back({m(r, 1), m(r, 2), static_cast<int>(m(r, 0))});
    dg.max_dim = std::max(dg.max_dim, static_cast<int>(m(r, 0)));
  }
  dg.sort();
  return dg;
}

dataio::Dataset make_dataset(const Array& x, const std::vector<int>& labels, std::vector<std::string> class_names) {
  dataio::Dataset d;
  d.features = to_matrix(x);
  d.labels = labels;
  if (class_names.empty()) {
    int k = 0;
    for (int l : labels) k = std::max(k, l + 1);
    for (int c = 0; c < k; ++c) class_names.push_back(std::to_string(c));
  }
  d.class_names = std::move(class_names);
  for (std::size_t c = 0; c < d.features.cols(); ++c) d.feature_names.push_back("f" + std::to_string(c));
  d.validate();
  return d;
}

}  // namespace

PYBIND11_MODULE(_tdamal, m) {
  m.doc() = "Topological data analysis toolkit for malware feature tables";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def(
      "synth_blobs",
      [](int n_classes, int per_class, int dims, double separation, std::uint64_t seed) {
        const auto d = dataio::synth_blobs(n_classes, per_class, dims, separation, seed);
        return py::make_tuple(to_array(d.features), d.labels, d.class_names);
      },
      py::arg("n_classes") = 4, py::arg("per_class") = 250, py::arg("dims") = 3, py::arg("separation") = 6.0,
      py::arg("seed") = 0, "Gaussian blobs; returns (features, labels, class_names).");

  m.def(
      "minmax_scale",
      [](const Array& x) {
        dataio::Dataset d = make_dataset(x, std::vector<int>(static_cast<std::size_t>(x.shape(0)), 0), {"all"});
        return to_array(dataio::minmax_scale(d).features);
      },
      py::arg("x"));

  m.def(
      "add_noise",
      [](const Array& x, double alpha, double mu, double sigma, const std::string& mode, std::uint64_t seed) {
        if (mode != "random-draw" && mode != "literal-pdf") throw py::value_error("mode: literal-pdf or random-draw");
        dataio::Dataset d = make_dataset(x, std::vector<int>(static_cast<std::size_t>(x.shape(0)), 0), {"all"});
        dataio::NoiseSpec spec{mu, sigma, alpha,
                               mode == "random-draw" ? dataio::NoiseMode::random_draw : dataio::NoiseMode::literal_pdf,
                               seed};
        return to_array(dataio::add_noise(d, spec).features);
      },
      py::arg("x"), py::arg("alpha"), py::arg("mu") = 0.0, py::arg("sigma") = 0.1, py::arg("mode") = "literal-pdf",
      py::arg("seed") = 0);

  m.def(
      "pca", [](const Array& x, std::size_t components) { return to_array(embed::fit_pca(to_matrix(x), components).transform(to_matrix(x)).coords); },
      py::arg("x"), py::arg("components") = 2);

  m.def(
      "rips_diagram",
      [](const Array& points, int max_dim, double threshold) {
        const auto d = embed::distance_matrix(to_matrix(points));
        return diagram_array(persistence::compute_diagram(complex::rips_filtration(d, max_dim, threshold)));
      },
      py::arg("points"), py::arg("max_dim") = 2, py::arg("threshold") = std::numeric_limits<double>::infinity(),
      "Rows (dim, birth, death); essential deaths are inf.");

  m.def(
      "oracle_betti",
      [](const Array& points, double t, int dim, int max_dim) {
        const auto d = embed::distance_matrix(to_matrix(points));
        return persistence::oracle_betti(complex::rips_filtration(d, max_dim), t, dim);
      },
      py::arg("points"), py::arg("t"), py::arg("dim"), py::arg("max_dim") = 2);

  m.def(
      "bottleneck",
      [](const Array& a, const Array& b, int dim) {
        return diagram::bottleneck(diagram_from(a), diagram_from(b), dim).distance;
      },
      py::arg("a"), py::arg("b"), py::arg("dim"));

  m.def(
      "local_features",
      [](const Array& x, std::size_t k) { return to_array(diagram::local_diagram_features(to_matrix(x), {k, 1})); },
      py::arg("x"), py::arg("k_neighbors") = 20);

  m.def("feature_names", &diagram::feature_names);

  m.def(
      "tomato",
      [](const Array& points, std::size_t k, double delta, const std::string& density, const std::string& filter) {
        const auto g = tomato::knn_graph(to_matrix(points), k);
        const auto f = tomato::estimate_density(
            g, density == "knn-density" ? tomato::DensityMethod::knn_density : tomato::DensityMethod::dtm);
        const auto r = tomato::tomato_cluster(
            g, f, delta, filter == "prominence" ? tomato::OutputFilter::prominence : tomato::OutputFilter::density);
        py::dict out;
        out["assignment"] = r.assignment;
        out["filtered_assignment"] = r.filtered_assignment();
        out["n_clusters"] = r.cluster_count();
        out["kept"] = r.kept_count();
        out["prominences"] = tomato::sorted_prominences(r);
        out["density"] = f.values;
        return out;
      },
      py::arg("points"), py::arg("k") = 10, py::arg("delta") = std::numeric_limits<double>::infinity(),
      py::arg("density") = "dtm", py::arg("filter") = "density");

  m.def(
      "mapper",
      [](const Array& x, const std::vector<int>& labels, const Array& lens, int intervals, double overlap,
         std::optional<double> cluster_eps, std::vector<std::string> class_names) {
        const auto d = make_dataset(x, labels, std::move(class_names));
        embed::Embedding e;
        e.coords = to_matrix(lens);
        e.method = embed::Method::external;
        e.components = e.coords.cols();
        const auto cover = mapper::build_cover(e, intervals, overlap);
        return mapper::export_graph(mapper::mapper_graph(d, e, cover, cluster_eps, "external"));
      },
      py::arg("x"), py::arg("labels"), py::arg("lens"), py::arg("intervals") = 10, py::arg("overlap") = 0.3,
      py::arg("cluster_eps") = py::none(), py::arg("class_names") = std::vector<std::string>{},
      "Graph document as a JSON string.");

  m.def(
      "train_evaluate",
      [](const std::string& kind, const Array& train_x, const std::vector<int>& train_y, const Array& test_x,
         const std::vector<int>& test_y, const std::map<std::string, double>& hyper, std::uint64_t seed,
         int benign_class) {
        const auto r = classify::train_and_evaluate(classify::parse_kind(kind), to_matrix(train_x), train_y,
                                                    to_matrix(test_x), test_y, hyper, seed, benign_class);
        py::dict out;
        out["dr"] = r.dr;
        out["fpr"] = r.fpr;
        out["confusion"] = r.confusion;
        out["per_class_accuracy"] = r.per_class_accuracy;
        return out;
      },
      py::arg("kind"), py::arg("train_x"), py::arg("train_y"), py::arg("test_x"), py::arg("test_y"),
      py::arg("hyper") = std::map<std::string, double>{}, py::arg("seed") = 0, py::arg("benign_class") = 0);
}
