#include "nerforge/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

namespace nerforge {

namespace {

Score score_spans(const std::vector<SpanList>& gold, const std::vector<SpanList>& pred) {
  if (gold.size() != pred.size())
    throw Error("gold has " + std::to_string(gold.size()) + " sentences, prediction has " +
                std::to_string(pred.size()));
  Score out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::set<EntitySpan> g(gold[i].begin(), gold[i].end());
    const std::set<EntitySpan> p(pred[i].begin(), pred[i].end());
    for (const auto& s : p) {
      auto& type = out.per_type[s.etype];
      if (g.count(s))
        ++type.tp;
      else
        ++type.fp;
    }
    for (const auto& s : g)
      if (!p.count(s)) ++out.per_type[s.etype].fn;
  }
  for (const auto& [_, prf] : out.per_type) out.micro += prf;
  return out;
}

}  // namespace

Score score_flat(const std::vector<SpanList>& gold, const std::vector<SpanList>& pred) {
  return score_spans(gold, pred);
}

Score score_nested(const std::vector<SpanList>& gold, const std::vector<SpanList>& pred) {
  return score_spans(gold, pred);
}

double macro_f1(const std::vector<double>& per_corpus_f1) {
  if (per_corpus_f1.empty()) throw Error("macro F1 of an empty corpus list");
  return std::accumulate(per_corpus_f1.begin(), per_corpus_f1.end(), 0.0) /
         static_cast<double>(per_corpus_f1.size());
}

std::string format_report(const std::string& corpus, const Score& score) {
  std::string out = "corpus: " + corpus + "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %8s %8s %8s %9s %9s %9s\n", "type", "tp", "fp", "fn", "precision",
                "recall", "f1");
  out += line;
  auto row = [&](const std::string& name, const PRF& p) {
    std::snprintf(line, sizeof line, "%-16s %8zu %8zu %8zu %9.4f %9.4f %9.4f\n", name.c_str(), p.tp, p.fp, p.fn,
                  p.precision(), p.recall(), p.f1());
    out += line;
  };
  for (const auto& [type, prf] : score.per_type) row(type, prf);
  row("micro", score.micro);
  return out;
}

std::string format_records(const std::string& corpus, const Score& score) {
  std::string out;
  auto record = [&](const std::string& type, const PRF& p) {
    nlohmann::ordered_json j = {{"corpus", corpus}, {"type", type},           {"tp", p.tp},
                                {"fp", p.fp},       {"fn", p.fn},             {"precision", p.precision()},
                                {"recall", p.recall()}, {"f1", p.f1()}};
    out += j.dump() + "\n";
  };
  for (const auto& [type, prf] : score.per_type) record(type, prf);
  record("*", score.micro);
  return out;
}

}  // namespace nerforge
