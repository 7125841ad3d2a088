#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tmforge/corpus.hpp"

// Corpus-level BLEU, chrF++ and TER with sacreBLEU 2.x default semantics.
namespace tmforge::metrics {

struct BleuConfig {
  int max_ngram_order = 4;
  std::string tokenizer = "13a";  // "13a" or "none" (whitespace split)
  bool case_sensitive = true;
  std::string smoothing = "exp";  // "exp" or "none"
};

struct ChrfConfig {
  int char_order = 6;
  int word_order = 2;
  double beta = 2.0;
};

struct TerConfig {
  bool normalized = false;
  bool case_insensitive = true;
  bool no_punct = false;
  int max_shift_distance = 50;
  int max_shift_size = 10;
};

struct MetricConfig {
  BleuConfig bleu;
  ChrfConfig chrf;
  TerConfig ter;

  /// Throws ValidationError on out-of-range fields or unknown names.
  void validate() const;
};

struct MetricReport {
  std::string name;
  double score = 0.0;
  std::string signature;
  std::vector<std::pair<std::string, double>> counts;
  std::string input_digest;

  /// Value of a named count; throws std::out_of_range if absent.
  double count(std::string_view key) const;
  std::string to_json() const;
};

// --- tokenizers ------------------------------------------------------------------

/// mteval-v13a tokenization, joined by single spaces.
std::string tokenize_13a_line(std::string_view text);
std::vector<std::string> tokenize_13a(std::string_view text);

/// Tercom tokenization as used for TER (lowercasing, optional normalization
/// and punctuation removal), joined by single spaces.
std::string tokenize_tercom(std::string_view text, const TerConfig& config);

/// chrF++ word tokens: whitespace split, then one leading or trailing
/// punctuation character split off.
std::vector<std::string> chrf_words(std::string_view text);

// --- BLEU ------------------------------------------------------------------------

struct BleuStats {
  std::vector<std::int64_t> correct;
  std::vector<std::int64_t> total;
  std::int64_t sys_len = 0;
  std::int64_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& other);
};

BleuStats bleu_sentence_stats(std::string_view hypothesis, std::string_view reference, const BleuConfig& config);

struct BleuResult {
  double score = 0.0;
  double brevity_penalty = 1.0;
  std::vector<double> precisions;
};

BleuResult bleu_from_stats(const BleuStats& stats, const BleuConfig& config);

// --- chrF++ ----------------------------------------------------------------------

/// Per order (characters first, then words): hypothesis, reference and matched counts.
struct ChrfStats {
  std::vector<std::int64_t> hyp;
  std::vector<std::int64_t> ref;
  std::vector<std::int64_t> match;

  ChrfStats& operator+=(const ChrfStats& other);
};

ChrfStats chrf_sentence_stats(std::string_view hypothesis, std::string_view reference, const ChrfConfig& config);
double chrf_from_stats(const ChrfStats& stats, const ChrfConfig& config);

// --- TER -------------------------------------------------------------------------

struct TerStats {
  std::int64_t edits = 0;
  std::int64_t ref_len = 0;
  std::int64_t shifts = 0;

  TerStats& operator+=(const TerStats& other);
};

/// Greedy-shift TER over already tokenized words.
TerStats translation_edit_rate(const std::vector<std::string>& hyp_words, const std::vector<std::string>& ref_words,
                               const TerConfig& config = {});

TerStats ter_sentence_stats(std::string_view hypothesis, std::string_view reference, const TerConfig& config);

/// 100 * edits / ref_len; 100 when the reference is empty and edits > 0.
double ter_from_stats(const TerStats& stats);

// --- corpus level ----------------------------------------------------------------

std::string bleu_signature(const BleuConfig& config);
std::string chrf_signature(const ChrfConfig& config);
std::string ter_signature(const TerConfig& config);

/// Throw ValidationError if the lists differ in size or are empty.
MetricReport bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                  const BleuConfig& config = {}, unsigned threads = 1);
MetricReport chrf_pp(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                     const ChrfConfig& config = {}, unsigned threads = 1);
MetricReport ter(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                 const TerConfig& config = {}, unsigned threads = 1);

/// SHA-256 over the length-prefixed (hypothesis, reference) pairs.
std::string pairs_digest(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references);

/// id -> text segments read from a JSON-lines file. A line is either a
/// corpus unit (text = targets[lang], or its only target when lang is unset)
/// or an object with "id" and one of "translation", "text", "output". An
/// "output" value is raw model output and goes through extract_translation.
struct Segment {
  std::string id;
  std::string text;
};
std::vector<Segment> read_segments(const std::filesystem::path& path, const std::optional<LangTag>& lang);

/// BLEU, chrF++ and TER over hypotheses joined to references by id, in
/// reference order. Throws ValidationError listing ids missing on either side.
std::vector<MetricReport> score_run(const std::filesystem::path& hyp_file, const std::filesystem::path& ref_file,
                                    const MetricConfig& config = {}, const std::optional<LangTag>& lang = {},
                                    unsigned threads = 1);
std::vector<MetricReport> score_segments(const std::vector<Segment>& hyps, const std::vector<Segment>& refs,
                                         const MetricConfig& config = {}, unsigned threads = 1);

std::string reports_to_json(const std::vector<MetricReport>& reports);

}  // namespace tmforge::metrics
