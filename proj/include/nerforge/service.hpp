#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nerforge/model.hpp"

namespace nerforge {

inline constexpr std::size_t kDefaultMaxPayload = 1 << 20;

/// Immutable set of loaded models, keyed by model name.
struct ModelSnapshot {
  std::map<std::string, std::shared_ptr<const ModelBundle>> models;
};

/// Throws ConfigError on duplicate model names.
std::shared_ptr<const ModelSnapshot> make_snapshot(std::vector<ModelBundle> models);
std::shared_ptr<const ModelSnapshot> load_snapshot(const std::vector<std::string>& checkpoint_paths);

/// Holds the current snapshot. Readers take a shared_ptr copy per request, so a reload
/// never mixes two snapshots within one request.
class ModelStore {
 public:
  ModelStore();
  explicit ModelStore(std::vector<std::string> checkpoint_paths);
  explicit ModelStore(std::shared_ptr<const ModelSnapshot> snapshot);

  std::shared_ptr<const ModelSnapshot> snapshot() const;
  void replace(std::shared_ptr<const ModelSnapshot> snapshot);
  /// Re-reads the checkpoint paths. On failure the current snapshot stays and the error propagates.
  std::shared_ptr<const ModelSnapshot> reload();

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> paths_;
  std::shared_ptr<const ModelSnapshot> current_;
};

struct RecognizeRequest {
  std::string data;
  std::string model;   // "" = first model by name
  std::string tagset;  // "" = model default (flat) or none (nested)
  std::string input = "plain";  // plain | conll
  std::string output = "json";  // json | conll | vertical
};

/// Throws ParseError on malformed JSON and ConfigError on bad field types or values.
RecognizeRequest parse_recognize_request(std::string_view body);

struct Reply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

Reply error_reply(int status, const std::string& message);

/// [{"name", "type", "tagsets", "languages"}] in name order.
nlohmann::json list_models(const ModelSnapshot& snapshot);

/// Status codes: 404 unknown model, 400 unknown tagset or bad request, 413 data above
/// `max_payload` bytes.
Reply recognize(const ModelSnapshot& snapshot, const RecognizeRequest& request,
                std::size_t max_payload = kDefaultMaxPayload);
/// Parses the JSON body, then as above. Bodies above `max_payload` bytes get 413.
Reply recognize_body(const ModelSnapshot& snapshot, std::string_view body,
                     std::size_t max_payload = kDefaultMaxPayload);

struct ServiceConfig {
  std::size_t max_payload = kDefaultMaxPayload;
  std::string static_dir;  // served at "/" when set; otherwise a placeholder page
};

/// HTTP front end: GET /models, POST /recognize, POST /admin/reload, GET /.
class Server {
 public:
  Server(ModelStore& store, ServiceConfig config = {});
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and returns the port (port 0 picks a free one). Throws Error on failure.
  int bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nerforge
