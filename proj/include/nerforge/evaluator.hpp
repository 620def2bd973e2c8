#pragma once

#include <map>
#include <string>
#include <vector>

#include "nerforge/types.hpp"

namespace nerforge {

/// Precision/recall/F1 from exact (start, end, etype) span matches. Zero denominators give 0.
struct PRF {
  std::size_t tp = 0, fp = 0, fn = 0;

  double precision() const { return tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0; }
  double recall() const { return tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0; }
  double f1() const {
    const double p = precision(), r = recall();
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }

  PRF& operator+=(const PRF& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  bool operator==(const PRF&) const = default;
};

struct Score {
  PRF micro;
  std::map<std::string, PRF> per_type;
};

/// Micro-aggregated span scores over aligned sentences. Throws Error on a sentence-count
/// mismatch. Duplicate spans within one sentence count once.
Score score_flat(const std::vector<SpanList>& gold, const std::vector<SpanList>& pred);
Score score_nested(const std::vector<SpanList>& gold, const std::vector<SpanList>& pred);

/// Unweighted mean; throws Error on an empty list.
double macro_f1(const std::vector<double>& per_corpus_f1);

/// Fixed-width table: one row per type plus a micro row.
std::string format_report(const std::string& corpus, const Score& score);

/// One JSON object per line: corpus, type, tp, fp, fn, precision, recall, f1. The micro row
/// uses type "*".
std::string format_records(const std::string& corpus, const Score& score);

}  // namespace nerforge
