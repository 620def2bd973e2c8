#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nerforge/encoder.hpp"
#include "nerforge/heads.hpp"
#include "nerforge/tagset.hpp"

namespace nerforge {

enum class ModelKind { Flat, Nested };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

/// Encoder plus either per-tagset flat heads or a nested decoder head.
struct ModelBundle {
  std::string name;
  ModelKind kind = ModelKind::Flat;
  std::vector<std::string> languages;
  EncoderConfig encoder_config;
  NestedHeadConfig nested_config;

  TagsetRegistry registry;  // flat models
  EncoderParams encoder;
  FlatHeads flat;                    // flat models
  std::optional<NestedHead> nested;  // nested models

  nlohmann::json metadata = nlohmann::json::object();

  /// Tagset used when a request names none (flat models only).
  const std::string& default_tagset() const;
  std::vector<std::string> tagset_names() const;
  /// Entity types a prediction can carry under `tagset` (ignored for nested models).
  std::vector<std::string> etypes(const std::string& tagset = "") const;
};

ModelBundle make_flat_model(std::string name, TagsetRegistry registry, const EncoderConfig& encoder,
                            std::uint64_t seed);
ModelBundle make_nested_model(std::string name, std::vector<std::string> etypes, const EncoderConfig& encoder,
                              const NestedHeadConfig& nested, std::uint64_t seed);

/// Spans for one sentence of at most `encoder_config.max_len` tokens.
SpanList predict_sentence(const ModelBundle& model, const std::vector<std::string>& tokens,
                          const std::string& tagset = "");

/// Checkpoint layout, version 1 (little-endian):
///   magic "NFCKPT\0\0" | u32 version | u64 header length | JSON header
///   | every tensor listed in the header, f64 column-major | u64 FNV-1a of all preceding bytes
/// The header echoes configs, the tagset registry, nested etypes, metadata and the tensor
/// manifest (name, rows, cols). Loading verifies the checksum and every shape.
std::string serialize_checkpoint(const ModelBundle& model);
ModelBundle deserialize_checkpoint(std::string_view bytes);
void save_checkpoint(const ModelBundle& model, const std::string& path);
ModelBundle load_checkpoint(const std::string& path);

/// 64-bit digest of the serialized checkpoint.
std::uint64_t checkpoint_digest(const ModelBundle& model);

}  // namespace nerforge
