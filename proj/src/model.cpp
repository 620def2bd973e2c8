#include "nerforge/model.hpp"

#include "nerforge/binary_io.hpp"
#include "nerforge/corpus_io.hpp"
#include "nerforge/types.hpp"

namespace nerforge {

std::string to_string(ModelKind kind) { return kind == ModelKind::Flat ? "flat" : "nested"; }

ModelKind parse_model_kind(const std::string& text) {
  if (text == "flat") return ModelKind::Flat;
  if (text == "nested") return ModelKind::Nested;
  throw ConfigError("unknown model kind '" + text + "'");
}

const std::string& ModelBundle::default_tagset() const {
  static const std::string empty;
  return kind == ModelKind::Flat && !registry.empty() ? registry.tagsets().front().name() : empty;
}

std::vector<std::string> ModelBundle::tagset_names() const {
  return kind == ModelKind::Flat ? registry.names() : std::vector<std::string>{};
}

std::vector<std::string> ModelBundle::etypes(const std::string& tagset) const {
  if (kind == ModelKind::Nested) return nested ? nested->etypes : std::vector<std::string>{};
  return registry.at(tagset.empty() ? default_tagset() : tagset).etypes();
}

ModelBundle make_flat_model(std::string name, TagsetRegistry registry, const EncoderConfig& encoder,
                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelBundle m;
  m.name = std::move(name);
  m.kind = ModelKind::Flat;
  m.encoder_config = encoder;
  m.registry = std::move(registry);
  m.encoder = init_encoder(encoder, rng);
  m.flat = init_flat_heads(m.registry, encoder.width, rng, encoder.init_scale);
  return m;
}

ModelBundle make_nested_model(std::string name, std::vector<std::string> etypes, const EncoderConfig& encoder,
                              const NestedHeadConfig& nested, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelBundle m;
  m.name = std::move(name);
  m.kind = ModelKind::Nested;
  m.encoder_config = encoder;
  m.nested_config = nested;
  m.encoder = init_encoder(encoder, rng);
  m.nested = init_nested_head(std::move(etypes), encoder.width, nested, rng, encoder.init_scale);
  return m;
}

SpanList predict_sentence(const ModelBundle& model, const std::vector<std::string>& tokens,
                          const std::string& tagset) {
  if (tokens.empty()) return {};
  const auto enc = embed(model.encoder, tokens, model.encoder_config.max_len);
  if (model.kind == ModelKind::Nested) return nested_predict(*model.nested, enc);
  return flat_predict(model.flat, enc, tagset.empty() ? model.default_tagset() : tagset);
}

namespace {

constexpr std::string_view kMagic{"NFCKPT\0\0", 8};

template <typename F>
void visit_bundle(const ModelBundle& m, F&& f) {
  EncoderParams::visit(m.encoder, [&](std::string_view n, const Matrix& t) { f("encoder." + std::string(n), t); });
  if (m.kind == ModelKind::Flat)
    FlatHeads::visit(m.flat, [&](std::string_view n, const Matrix& t) { f("flat." + std::string(n), t); });
  else
    NestedHead::visit(*m.nested, [&](std::string_view n, const Matrix& t) { f("nested." + std::string(n), t); });
}

template <typename F>
void visit_bundle(ModelBundle& m, F&& f) {
  EncoderParams::visit(m.encoder, [&](std::string_view n, Matrix& t) { f("encoder." + std::string(n), t); });
  if (m.kind == ModelKind::Flat)
    FlatHeads::visit(m.flat, [&](std::string_view n, Matrix& t) { f("flat." + std::string(n), t); });
  else
    NestedHead::visit(*m.nested, [&](std::string_view n, Matrix& t) { f("nested." + std::string(n), t); });
}

}  // namespace

std::string serialize_checkpoint(const ModelBundle& m) {
  nlohmann::json header = {{"format", "nerforge-checkpoint"},
                           {"version", 1},
                           {"name", m.name},
                           {"kind", to_string(m.kind)},
                           {"languages", m.languages},
                           {"encoder", m.encoder_config},
                           {"encoder_frozen", m.encoder.frozen},
                           {"metadata", m.metadata}};
  if (m.kind == ModelKind::Flat) {
    header["tagsets"] = registry_to_json(m.registry);
  } else {
    header["nested"] = m.nested_config;
    header["nested"]["max_depth"] = m.nested->max_depth;
    header["nested_etypes"] = m.nested->etypes;
  }
  nlohmann::json manifest = nlohmann::json::array();
  visit_bundle(m, [&](const std::string& name, const Matrix& t) {
    manifest.push_back({{"name", name}, {"rows", t.rows()}, {"cols", t.cols()}});
  });
  header["tensors"] = manifest;

  binary::Writer w;
  w.bytes(kMagic);
  w.u32(1);
  const std::string header_text = header.dump();
  w.u64(header_text.size());
  w.bytes(header_text);
  visit_bundle(m, [&](const std::string&, const Matrix& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) w.f64(t.data()[i]);
  });
  w.u64(fnv1a(w.data()));
  return w.data();
}

ModelBundle deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 8 || bytes.substr(0, kMagic.size()) != kMagic)
    throw ParseError("not a nerforge checkpoint");
  {
    binary::Reader tail(bytes.substr(bytes.size() - 8));
    if (tail.u64() != fnv1a(bytes.substr(0, bytes.size() - 8)))
      throw ParseError("checkpoint checksum mismatch");
  }
  binary::Reader r(bytes.substr(0, bytes.size() - 8));
  r.bytes(kMagic.size());
  if (auto version = r.u32(); version != 1)
    throw ParseError("unsupported checkpoint version " + std::to_string(version));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(r.bytes(r.u64()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }

  ModelBundle m;
  try {
    const auto kind = parse_model_kind(header.at("kind").get<std::string>());
    const auto encoder = header.at("encoder").get<EncoderConfig>();
    if (kind == ModelKind::Flat) {
      m = make_flat_model(header.at("name"), load_registry(header.at("tagsets")), encoder, 0);
    } else {
      m = make_nested_model(header.at("name"), header.at("nested_etypes").get<std::vector<std::string>>(), encoder,
                            header.at("nested").get<NestedHeadConfig>(), 0);
    }
    m.languages = header.at("languages").get<std::vector<std::string>>();
    m.encoder.frozen = header.at("encoder_frozen").get<bool>();
    m.metadata = header.at("metadata");

    const auto& manifest = header.at("tensors");
    std::size_t index = 0;
    visit_bundle(m, [&](const std::string& name, Matrix& t) {
      if (index >= manifest.size()) throw ShapeError("checkpoint is missing tensor '" + name + "'");
      const auto& entry = manifest[index++];
      if (entry.at("name") != name || entry.at("rows").get<Eigen::Index>() != t.rows() ||
          entry.at("cols").get<Eigen::Index>() != t.cols())
        throw ShapeError("checkpoint tensor " + entry.dump() + " does not match expected '" + name + "' (" +
                         std::to_string(t.rows()) + "x" + std::to_string(t.cols()) + ")");
      for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = r.f64();
    });
    if (index != manifest.size()) throw ShapeError("checkpoint has unexpected extra tensors");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  if (!r.done()) throw ParseError("trailing bytes in checkpoint");
  return m;
}

void save_checkpoint(const ModelBundle& model, const std::string& path) {
  write_file(path, serialize_checkpoint(model));
}

ModelBundle load_checkpoint(const std::string& path) { return deserialize_checkpoint(read_file(path)); }

std::uint64_t checkpoint_digest(const ModelBundle& model) { return fnv1a(serialize_checkpoint(model)); }

}  // namespace nerforge
