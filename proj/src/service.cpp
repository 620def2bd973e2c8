#include "nerforge/service.hpp"

#include <httplib.h>

#include "nerforge/annotate.hpp"
#include "nerforge/corpus_io.hpp"
#include "nerforge/tokenizer.hpp"

namespace nerforge {

std::shared_ptr<const ModelSnapshot> make_snapshot(std::vector<ModelBundle> models) {
  auto snap = std::make_shared<ModelSnapshot>();
  for (auto& m : models) {
    auto name = m.name;
    if (!snap->models.emplace(name, std::make_shared<const ModelBundle>(std::move(m))).second)
      throw ConfigError("duplicate model name '" + name + "'");
  }
  return snap;
}

std::shared_ptr<const ModelSnapshot> load_snapshot(const std::vector<std::string>& checkpoint_paths) {
  std::vector<ModelBundle> models;
  for (const auto& p : checkpoint_paths) models.push_back(load_checkpoint(p));
  return make_snapshot(std::move(models));
}

ModelStore::ModelStore() : current_(std::make_shared<const ModelSnapshot>()) {}

ModelStore::ModelStore(std::vector<std::string> checkpoint_paths)
    : paths_(std::move(checkpoint_paths)), current_(load_snapshot(paths_)) {}

ModelStore::ModelStore(std::shared_ptr<const ModelSnapshot> snapshot) : current_(std::move(snapshot)) {}

std::shared_ptr<const ModelSnapshot> ModelStore::snapshot() const {
  std::lock_guard lock(mutex_);
  return current_;
}

void ModelStore::replace(std::shared_ptr<const ModelSnapshot> snapshot) {
  std::lock_guard lock(mutex_);
  current_ = std::move(snapshot);
}

std::shared_ptr<const ModelSnapshot> ModelStore::reload() {
  std::vector<std::string> paths;
  {
    std::lock_guard lock(mutex_);
    paths = paths_;
  }
  auto fresh = load_snapshot(paths);  // loaded outside the lock
  replace(fresh);
  return fresh;
}

RecognizeRequest parse_recognize_request(std::string_view body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("request body is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("request body must be a JSON object");
  RecognizeRequest r;
  auto field = [&](const char* key, std::string& dst) {
    if (!j.contains(key) || j[key].is_null()) return;
    if (!j[key].is_string()) throw ConfigError(std::string("field '") + key + "' must be a string");
    dst = j[key].get<std::string>();
  };
  field("data", r.data);
  field("model", r.model);
  field("tagset", r.tagset);
  field("input", r.input);
  field("output", r.output);
  return r;
}

Reply error_reply(int status, const std::string& message) {
  return {status, "application/json", nlohmann::json{{"error", message}}.dump()};
}

nlohmann::json list_models(const ModelSnapshot& snapshot) {
  auto out = nlohmann::json::array();
  for (const auto& [name, m] : snapshot.models)
    out.push_back({{"name", name}, {"type", to_string(m->kind)}, {"tagsets", m->tagset_names()}, {"languages", m->languages}});
  return out;
}

Reply recognize(const ModelSnapshot& snapshot, const RecognizeRequest& request, std::size_t max_payload) {
  if (request.data.size() > max_payload)
    return error_reply(413, "data exceeds " + std::to_string(max_payload) + " bytes");
  if (request.input != "plain" && request.input != "conll")
    return error_reply(400, "input must be plain or conll, got '" + request.input + "'");
  if (request.output != "json" && request.output != "conll" && request.output != "vertical")
    return error_reply(400, "output must be json, conll or vertical, got '" + request.output + "'");
  if (snapshot.models.empty()) return error_reply(404, "no models loaded");

  std::shared_ptr<const ModelBundle> model;
  if (request.model.empty()) {
    model = snapshot.models.begin()->second;
  } else {
    auto it = snapshot.models.find(request.model);
    if (it == snapshot.models.end()) return error_reply(404, "unknown model '" + request.model + "'");
    model = it->second;
  }

  std::string tagset;
  try {
    tagset = resolve_tagset(*model, request.tagset);
  } catch (const RoutingError& e) {
    return error_reply(400, e.what());
  }

  Document doc;
  doc.id = "request";
  try {
    if (request.input == "plain") {
      doc.sentences = tokenize_plain(request.data);
    } else {
      for (auto& d : parse_conll_tokens(request.data))
        for (auto& s : d.sentences) doc.sentences.push_back(std::move(s));
    }
  } catch (const ParseError& e) {
    return error_reply(400, e.what());
  }

  doc = annotate(*model, std::move(doc), tagset);
  if (request.output == "json") return {200, "application/json", render_json(*model, tagset, doc).dump()};
  const auto text = request.output == "conll" ? render_conll(*model, doc) : render_vertical(*model, doc);
  return {200, "text/plain; charset=utf-8", text};
}

Reply recognize_body(const ModelSnapshot& snapshot, std::string_view body, std::size_t max_payload) {
  if (body.size() > max_payload) return error_reply(413, "request exceeds " + std::to_string(max_payload) + " bytes");
  RecognizeRequest request;
  try {
    request = parse_recognize_request(body);
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
  return recognize(snapshot, request, max_payload);
}

namespace {

constexpr const char* kPlaceholderPage =
    "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>nerforge</title></head>\n"
    "<body><h1>nerforge</h1><p>No web UI is installed. The API is available at "
    "<code>GET /models</code> and <code>POST /recognize</code>.</p></body></html>\n";

void send(httplib::Response& res, const Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body, reply.content_type);
}

}  // namespace

struct Server::Impl {
  ModelStore& store;
  ServiceConfig config;
  httplib::Server http;

  Impl(ModelStore& s, ServiceConfig c) : store(s), config(std::move(c)) {
    http.set_payload_max_length(config.max_payload);
    http.Get("/models", [this](const httplib::Request&, httplib::Response& res) {
      send(res, {200, "application/json", list_models(*store.snapshot()).dump()});
    });
    http.Post("/recognize", [this](const httplib::Request& req, httplib::Response& res) {
      const auto snapshot = store.snapshot();  // one snapshot for the whole request
      send(res, recognize_body(*snapshot, req.body, config.max_payload));
    });
    http.Post("/admin/reload", [this](const httplib::Request&, httplib::Response& res) {
      try {
        send(res, {200, "application/json", list_models(*store.reload()).dump()});
      } catch (const std::exception& e) {
        send(res, error_reply(500, std::string("reload failed: ") + e.what()));
      }
    });
    if (!config.static_dir.empty()) {
      if (!http.set_mount_point("/", config.static_dir))
        throw ConfigError("static directory '" + config.static_dir + "' does not exist");
    } else {
      http.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kPlaceholderPage, "text/html; charset=utf-8");
      });
    }
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      send(res, error_reply(500, what));
    });
    http.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) send(res, error_reply(res.status, httplib::status_message(res.status)));
    });
  }
};

Server::Server(ModelStore& store, ServiceConfig config) : impl_(std::make_unique<Impl>(store, std::move(config))) {}

Server::~Server() { stop(); }

int Server::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->http.bind_to_any_port(host) : (impl_->http.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void Server::listen() { impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_) impl_->http.stop();
}

}  // namespace nerforge
