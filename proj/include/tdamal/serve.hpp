#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>

#include "tdamal/dataio.hpp"
#include "tdamal/embed.hpp"
#include "tdamal/mapper.hpp"

namespace tdamal::serve {

struct Config {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::size_t max_body_bytes = 64u << 20;
  std::string cors_origin = "*";
};

struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct Session {
  std::string dataset_id;
  dataio::Dataset raw;     // as uploaded
  dataio::Dataset scaled;  // min-max scaled, used for clustering and lenses
  std::map<std::string, embed::Embedding> lenses;  // keyed by lens descriptor
  std::mutex recompute;    // serializes Mapper runs on this dataset
};

/// Request routing and session state, usable without a socket.
///
///   POST /api/dataset?label=<column>   CSV body   -> {dataset_id, n_rows, classes}
///   POST /api/embedding?dataset_id=<id> CSV body  -> {embedding_id, n_rows, dims}
///   POST /api/mapper                   JSON body  -> graph document + graph_id
///   GET  /api/node/<graph_id>/<node_id>           -> node detail
///   GET  /api/health
class Service {
 public:
  explicit Service(Config config = {});

  Response handle(const Request& req);
  const Config& config() const noexcept { return config_; }

  std::size_t dataset_count() const;
  std::size_t graph_count() const;

 private:
  Response post_dataset(const Request& req);
  Response post_embedding(const Request& req);
  Response post_mapper(const Request& req);
  Response get_node(std::string_view graph_id, std::string_view node_id);

  std::shared_ptr<Session> find_session(const std::string& id) const;
  std::string next_id(char prefix);

  struct StoredGraph {
    std::string dataset_id;
    mapper::MapperGraph graph;
  };
  struct StoredEmbedding {
    std::string dataset_id;
    embed::Embedding embedding;
  };

  Config config_;
  std::atomic<std::uint64_t> counter_{0};
  mutable std::shared_mutex lock_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<const StoredGraph>> graphs_;
  std::map<std::string, std::shared_ptr<const StoredEmbedding>> embeddings_;
};

/// Blocks serving `service` over HTTP until the process is stopped.
void run_server(Service& service);

}  // namespace tdamal::serve
