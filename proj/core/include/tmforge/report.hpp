#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tmforge/corpus.hpp"

namespace tmforge::report {

enum class SizeLabel { kGpt35, kBaseline, k1k, k2k, k5k, k10k, k14_7k, k100kPlus };

inline constexpr std::array<SizeLabel, 8> kSizeLabels = {SizeLabel::kGpt35, SizeLabel::kBaseline, SizeLabel::k1k,
                                                         SizeLabel::k2k,    SizeLabel::k5k,      SizeLabel::k10k,
                                                         SizeLabel::k14_7k, SizeLabel::k100kPlus};

/// "gpt35", "baseline", "1k", "2k", "5k", "10k", "14.7k", "100k+".
std::string_view to_string(SizeLabel s);
SizeLabel parse_size_label(std::string_view s);

enum class Metric { kBleu, kChrf, kTer, kComet };

inline constexpr std::array<Metric, 4> kMetrics = {Metric::kBleu, Metric::kChrf, Metric::kTer, Metric::kComet};

std::string_view to_string(Metric m);
/// TER is the only metric where lower is better.
bool higher_is_better(Metric m);

struct RunRow {
  LangTag language;
  SizeLabel size = SizeLabel::kBaseline;
  double bleu = 0.0;
  double chrf = 0.0;
  double ter = 0.0;
  std::optional<double> comet;

  std::optional<double> value(Metric m) const;
  bool operator==(const RunRow&) const = default;
};

/// Rows in insertion order, at most one per (language, size).
class RunTable {
 public:
  /// Throws ValidationError on a duplicate key or a score outside [0, 200].
  void add(RunRow row);

  const std::vector<RunRow>& rows() const { return rows_; }
  const RunRow* find(const LangTag& lang, SizeLabel size) const;
  /// Languages in first-appearance order.
  std::vector<LangTag> languages() const;
  bool empty() const { return rows_.empty(); }

  bool operator==(const RunTable&) const = default;

 private:
  std::vector<RunRow> rows_;
};

/// CSV (header with language,size,bleu,chrf,ter[,comet]) or a JSON array of
/// row objects, chosen by the .json extension.
RunTable load_run_table(const std::filesystem::path& path);
RunTable parse_run_table_csv(std::string_view data);
RunTable parse_run_table_json(std::string_view data);

struct MetricDelta {
  double absolute = 0.0;          // mean of per-language differences (TER: decrease)
  double relative_percent = 0.0;  // mean of per-language relative differences
  std::size_t languages = 0;
};

struct DeltaSummary {
  SizeLabel size = SizeLabel::kBaseline;
  MetricDelta bleu;
  MetricDelta chrf;
  MetricDelta ter;
  std::optional<MetricDelta> comet;

  const std::optional<MetricDelta> get(Metric m) const;
};

/// Deltas of `size` against baseline over every language with a `size` row.
/// Throws ValidationError naming a language that lacks a baseline row.
DeltaSummary delta_summary(const RunTable& table, SizeLabel size);

/// 100 * (score@size - score@baseline) / score@baseline for one language
/// (sign flipped for TER). Throws ValidationError if either value is missing.
double relative_gain(const RunTable& table, const LangTag& lang, SizeLabel size, Metric metric);

struct CellMark {
  bool best = false;
  bool worst = false;
};

/// Per row, per metric (kMetrics order). gpt35 rows are never marked; ties
/// mark every tied cell.
std::vector<std::array<CellMark, 4>> best_worst_markers(const RunTable& table);

enum class Format { kMarkdown, kCsv };

Format parse_format(std::string_view s);

std::string render(const RunTable& table, const std::vector<DeltaSummary>& summaries, Format format);

}  // namespace tmforge::report
