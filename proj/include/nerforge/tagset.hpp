#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace nerforge {

/// Label inventory for one tagset. Ids: `O` = 0, `B-X` = 1 + 2i, `I-X` = 2 + 2i for etype i.
class Tagset {
 public:
  Tagset() = default;
  Tagset(std::string name, std::vector<std::string> etypes);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& etypes() const { return etypes_; }
  std::size_t num_labels() const { return 1 + 2 * etypes_.size(); }
  bool has_etype(std::string_view etype) const;

  /// Throws LookupError for labels outside the tagset.
  int id(std::string_view label) const;
  const std::string& label(int id) const;

  std::vector<int> encode(const std::vector<std::string>& labels) const;
  std::vector<std::string> decode(std::span<const int> ids) const;

  bool operator==(const Tagset& o) const { return name_ == o.name_ && etypes_ == o.etypes_; }

 private:
  std::string name_;
  std::vector<std::string> etypes_;
  std::vector<std::string> labels_;
  std::map<std::string, int, std::less<>> ids_;
};

/// True iff every id is a label of `tagset`.
bool validate_labels(const Tagset& tagset, std::span<const int> ids);

/// Named tagsets in configuration order.
class TagsetRegistry {
 public:
  void add(Tagset tagset);

  bool empty() const { return tagsets_.empty(); }
  std::size_t size() const { return tagsets_.size(); }
  bool contains(std::string_view name) const;
  /// Throws RoutingError for unknown names.
  const Tagset& at(std::string_view name) const;
  const std::vector<Tagset>& tagsets() const { return tagsets_; }
  std::vector<std::string> names() const;

  bool operator==(const TagsetRegistry&) const = default;

 private:
  std::vector<Tagset> tagsets_;
};

/// Tagset config schema (version 1):
///   {"version": 1, "tagsets": [{"name": "conll", "etypes": ["PER", "ORG", "LOC", "MISC"]}]}
TagsetRegistry load_registry(const nlohmann::json& config);
TagsetRegistry parse_registry(std::string_view text);
TagsetRegistry load_registry_file(const std::string& path);
nlohmann::json registry_to_json(const TagsetRegistry& registry);

}  // namespace nerforge
