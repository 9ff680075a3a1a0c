#include "tdamal/serve.hpp"

#include <httplib.h>

#include <iostream>
#include <json.hpp>

#include "tdamal/error.hpp"
#include "tdamal/text.hpp"

namespace tdamal::serve {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

Response json_response(int status, const ordered_json& body) { return {status, body.dump() + "\n"}; }

Response error_response(int status, const std::string& message) {
  return json_response(status, ordered_json{{"error", message}});
}

std::pair<mapper::ClusterEps, bool> parse_eps(const json& v) {
  if (v.is_string()) return {std::nullopt, v.get<std::string>() == "auto"};
  if (v.is_number()) {
    const double eps = v.get<double>();
    return {eps, eps > 0.0};
  }
  return {std::nullopt, false};
}

}  // namespace

Service::Service(Config config) : config_(std::move(config)) {}

std::string Service::next_id(char prefix) { return std::string(1, prefix) + std::to_string(++counter_); }

std::size_t Service::dataset_count() const {
  std::shared_lock guard(lock_);
  return sessions_.size();
}

std::size_t Service::graph_count() const {
  std::shared_lock guard(lock_);
  return graphs_.size();
}

std::shared_ptr<Session> Service::find_session(const std::string& id) const {
  std::shared_lock guard(lock_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

Response Service::handle(const Request& req) {
  if (req.method == "OPTIONS") return {204, "", "text/plain"};
  if (req.body.size() > config_.max_body_bytes)
    return error_response(413, "request body exceeds " + std::to_string(config_.max_body_bytes) + " bytes");
  try {
    if (req.method == "POST" && req.path == "/api/dataset") return post_dataset(req);
    if (req.method == "POST" && req.path == "/api/embedding") return post_embedding(req);
    if (req.method == "POST" && req.path == "/api/mapper") return post_mapper(req);
    if (req.method == "GET" && req.path == "/api/health") return json_response(200, {{"status", "ok"}});
    const std::string_view prefix = "/api/node/";
    if (req.method == "GET" && req.path.starts_with(prefix)) {
      const std::string rest = req.path.substr(prefix.size());
      const auto slash = rest.find('/');
      if (slash == std::string::npos) return error_response(404, "expected /api/node/<graph_id>/<node_id>");
      return get_node(std::string_view(rest).substr(0, slash), std::string_view(rest).substr(slash + 1));
    }
    return error_response(404, "no route for " + req.method + " " + req.path);
  } catch (const Error& ex) {
    return error_response(ex.code() == ErrorCode::not_found ? 404 : 400, ex.what());
  } catch (const std::exception& ex) {
    return error_response(500, ex.what());
  }
}

Response Service::post_dataset(const Request& req) {
  const auto it = req.query.find("label");
  const std::string label = it == req.query.end() ? "Class" : it->second;
  dataio::Dataset raw;
  try {
    raw = dataio::parse_dataset(req.body, label);
  } catch (const Error& ex) {
    return error_response(400, ex.what());
  }
  if (raw.size() == 0) return error_response(400, "dataset has no rows");

  auto session = std::make_shared<Session>();
  session->scaled = dataio::minmax_scale(raw);
  session->raw = std::move(raw);
  session->dataset_id = next_id('d');
  ordered_json body{{"dataset_id", session->dataset_id},
                    {"n_rows", session->raw.size()},
                    {"classes", session->raw.class_names}};
  {
    std::unique_lock guard(lock_);
    sessions_[session->dataset_id] = session;
  }
  return json_response(200, body);
}

Response Service::post_embedding(const Request& req) {
  const auto it = req.query.find("dataset_id");
  if (it == req.query.end()) return error_response(400, "missing dataset_id query parameter");
  const auto session = find_session(it->second);
  if (!session) return error_response(404, "unknown dataset_id " + it->second);
  embed::Embedding e;
  try {
    e = embed::parse_embedding(req.body, session->raw.size());
  } catch (const Error& ex) {
    return error_response(ex.code() == ErrorCode::invalid_argument ? 422 : 400, ex.what());
  }
  if (e.components < 1 || e.components > 2) return error_response(422, "lens embeddings must have 1 or 2 columns");
  auto stored = std::make_shared<StoredEmbedding>(StoredEmbedding{session->dataset_id, std::move(e)});
  const std::string id = next_id('e');
  ordered_json body{{"embedding_id", id}, {"n_rows", stored->embedding.coords.rows()}, {"dims", stored->embedding.components}};
  {
    std::unique_lock guard(lock_);
    embeddings_[id] = std::move(stored);
  }
  return json_response(200, body);
}

Response Service::post_mapper(const Request& req) {
  json params;
  try {
    params = json::parse(req.body);
  } catch (const json::exception& ex) {
    return error_response(400, std::string("malformed JSON: ") + ex.what());
  }
  if (!params.is_object()) return error_response(400, "request body must be a JSON object");
  if (!params.contains("dataset_id") || !params["dataset_id"].is_string())
    return error_response(400, "missing dataset_id");
  const auto session = find_session(params["dataset_id"].get<std::string>());
  if (!session) return error_response(404, "unknown dataset_id " + params["dataset_id"].get<std::string>());

  const json lens_v = params.value("lens", json("pca"));
  const json intervals_v = params.value("intervals", json(10));
  const json overlap_v = params.value("overlap", json(0.3));
  const json eps_v = params.value("cluster_eps", json("auto"));
  if (!lens_v.is_string()) return error_response(422, "lens must be a string");
  if (!intervals_v.is_number_integer() || intervals_v.get<long long>() < 1 || intervals_v.get<long long>() > 1000)
    return error_response(422, "intervals must be an integer in [1, 1000]");
  if (!overlap_v.is_number()) return error_response(422, "overlap must be a number");
  const double overlap = overlap_v.get<double>();
  if (!(overlap > 0.0 && overlap < 1.0)) return error_response(422, "overlap must lie strictly between 0 and 1");
  const auto [eps, eps_ok] = parse_eps(eps_v);
  if (!eps_ok) return error_response(422, "cluster_eps must be a positive number or \"auto\"");
  const std::string lens_desc = lens_v.get<std::string>();
  const int intervals = static_cast<int>(intervals_v.get<long long>());

  std::shared_ptr<const StoredEmbedding> external;
  if (lens_desc.starts_with("external:")) {
    const std::string id = lens_desc.substr(9);
    std::shared_lock guard(lock_);
    const auto it = embeddings_.find(id);
    if (it == embeddings_.end()) return error_response(404, "unknown embedding " + id);
    if (it->second->dataset_id != session->dataset_id)
      return error_response(422, "embedding " + id + " belongs to another dataset");
    external = it->second;
  } else if (lens_desc != "pca") {
    return error_response(422, "lens must be \"pca\" or \"external:<id>\"");
  }

  mapper::MapperGraph graph;
  {
    std::lock_guard recompute(session->recompute);
    try {
      auto cached = session->lenses.find(lens_desc);
      if (cached == session->lenses.end()) {
        const std::size_t dims = std::min<std::size_t>(2, session->scaled.features.cols());
        embed::Embedding lens = external ? external->embedding : embed::pca(session->scaled, dims);
        cached = session->lenses.emplace(lens_desc, std::move(lens)).first;
      }
      const auto cover = mapper::build_cover(cached->second, intervals, overlap);
      graph = mapper::mapper_graph(session->scaled, cached->second, cover, eps, lens_desc);
    } catch (const Error& ex) {
      return error_response(422, ex.what());
    }
  }

  auto stored = std::make_shared<StoredGraph>(StoredGraph{session->dataset_id, std::move(graph)});
  const std::string graph_id = next_id('g');
  auto body = mapper::graph_to_json(stored->graph);
  body["graph_id"] = graph_id;
  body["dataset_id"] = session->dataset_id;
  {
    std::unique_lock guard(lock_);
    graphs_[graph_id] = std::move(stored);
  }
  return json_response(200, body);
}

Response Service::get_node(std::string_view graph_id, std::string_view node_id) {
  std::shared_ptr<const StoredGraph> stored;
  {
    std::shared_lock guard(lock_);
    const auto it = graphs_.find(std::string(graph_id));
    if (it == graphs_.end()) return error_response(404, "unknown graph " + std::string(graph_id));
    stored = it->second;
  }
  const auto id = parse_real(node_id);
  const auto& nodes = stored->graph.nodes;
  const auto node = std::find_if(nodes.begin(), nodes.end(), [&](const mapper::MapperNode& n) {
    return id && static_cast<double>(n.id) == *id;
  });
  if (node == nodes.end()) return error_response(404, "unknown node " + std::string(node_id));
  const auto session = find_session(stored->dataset_id);
  if (!session) return error_response(404, "dataset of graph is gone");

  const auto& raw = session->raw;
  std::vector<double> means(raw.features.cols(), 0.0);
  for (auto r : node->members)
    for (std::size_t c = 0; c < means.size(); ++c) means[c] += raw.features(r, c);
  for (double& m : means) m /= static_cast<double>(node->members.size());

  ordered_json hist = ordered_json::object();
  for (std::size_t c = 0; c < node->label_hist.size(); ++c) hist[raw.class_names[c]] = node->label_hist[c];
  ordered_json body{{"graph_id", std::string(graph_id)},
                    {"node_id", node->id},
                    {"size", node->size()},
                    {"members", node->members},
                    {"label_hist", hist},
                    {"feature_names", raw.feature_names},
                    {"feature_means", means},
                    {"mean_lens", node->mean_lens},
                    {"flag_novel", node->flag_novel}};
  return json_response(200, body);
}

void run_server(Service& service) {
  httplib::Server server;
  server.set_payload_max_length(service.config().max_body_bytes);
  const std::string origin = service.config().cors_origin;

  auto dispatch = [&service, origin](const httplib::Request& in, httplib::Response& out) {
    Request req{in.method, in.path, {}, in.body};
    for (const auto& [k, v] : in.params) req.query[k] = v;
    const Response res = service.handle(req);
    out.status = res.status;
    out.set_header("Access-Control-Allow-Origin", origin);
    out.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    out.set_header("Access-Control-Allow-Headers", "Content-Type");
    if (!res.body.empty()) out.set_content(res.body, res.content_type);
  };
  server.Get(R"(/.*)", dispatch);
  server.Post(R"(/.*)", dispatch);
  server.Options(R"(/.*)", dispatch);
  server.set_error_handler([origin](const httplib::Request&, httplib::Response& out) {
    out.set_header("Access-Control-Allow-Origin", origin);
    if (out.body.empty()) out.set_content(ordered_json{{"error", httplib::status_message(out.status)}}.dump() + "\n", "application/json");
  });

  const auto& cfg = service.config();
  std::cerr << "serving on http://" << cfg.bind_address << ":" << cfg.port << "\n";
  if (!server.listen(cfg.bind_address, cfg.port))
    fail(ErrorCode::io, "cannot listen on " + cfg.bind_address + ":" + std::to_string(cfg.port));
}

}  // namespace tdamal::serve
