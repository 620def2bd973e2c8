#include "nerforge/tagset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "nerforge/types.hpp"

namespace nerforge {

Tagset::Tagset(std::string name, std::vector<std::string> etypes)
    : name_(std::move(name)), etypes_(std::move(etypes)) {
  if (name_.empty()) throw ConfigError("tagset with empty name");
  labels_.emplace_back("O");
  for (const auto& e : etypes_) {
    check_span({0, 1, e}, 1);
    labels_.push_back("B-" + e);
    labels_.push_back("I-" + e);
  }
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (!ids_.emplace(labels_[i], static_cast<int>(i)).second)
      throw ConfigError("duplicate etype in tagset '" + name_ + "': " + labels_[i].substr(2));
}

bool Tagset::has_etype(std::string_view etype) const {
  return std::find(etypes_.begin(), etypes_.end(), etype) != etypes_.end();
}

int Tagset::id(std::string_view label) const {
  auto it = ids_.find(label);
  if (it == ids_.end())
    throw LookupError("label '" + std::string(label) + "' not in tagset '" + name_ + "'");
  return it->second;
}

const std::string& Tagset::label(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= labels_.size())
    throw LookupError("label id " + std::to_string(id) + " not in tagset '" + name_ + "'");
  return labels_[static_cast<std::size_t>(id)];
}

std::vector<int> Tagset::encode(const std::vector<std::string>& labels) const {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(id(l));
  return out;
}

std::vector<std::string> Tagset::decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int i : ids) out.push_back(label(i));
  return out;
}

bool validate_labels(const Tagset& tagset, std::span<const int> ids) {
  return std::all_of(ids.begin(), ids.end(), [&](int i) {
    return i >= 0 && static_cast<std::size_t>(i) < tagset.num_labels();
  });
}

void TagsetRegistry::add(Tagset tagset) {
  if (contains(tagset.name())) throw ConfigError("duplicate tagset name '" + tagset.name() + "'");
  tagsets_.push_back(std::move(tagset));
}

bool TagsetRegistry::contains(std::string_view name) const {
  return std::any_of(tagsets_.begin(), tagsets_.end(), [&](const Tagset& t) { return t.name() == name; });
}

const Tagset& TagsetRegistry::at(std::string_view name) const {
  for (const auto& t : tagsets_)
    if (t.name() == name) return t;
  throw RoutingError("unknown tagset '" + std::string(name) + "'");
}

std::vector<std::string> TagsetRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& t : tagsets_) out.push_back(t.name());
  return out;
}

TagsetRegistry load_registry(const nlohmann::json& config) {
  try {
    if (config.contains("version") && config.at("version").get<int>() != 1)
      throw ConfigError("unsupported tagset config version " + config.at("version").dump());
    TagsetRegistry registry;
    for (const auto& entry : config.at("tagsets"))
      registry.add(Tagset(entry.at("name").get<std::string>(),
                          entry.at("etypes").get<std::vector<std::string>>()));
    return registry;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("tagset config: ") + e.what());
  } catch (const SpanError& e) {
    throw ConfigError(std::string("tagset config: ") + e.what());
  }
}

TagsetRegistry parse_registry(std::string_view text) {
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("tagset config: ") + e.what());
  }
  return load_registry(config);
}

TagsetRegistry load_registry_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open tagset config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_registry(ss.str());
}

nlohmann::json registry_to_json(const TagsetRegistry& registry) {
  nlohmann::json tagsets = nlohmann::json::array();
  for (const auto& t : registry.tagsets()) tagsets.push_back({{"name", t.name()}, {"etypes", t.etypes()}});
  return {{"version", 1}, {"tagsets", tagsets}};
}

}  // namespace nerforge
