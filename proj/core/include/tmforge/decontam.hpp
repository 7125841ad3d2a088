#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tmforge/corpus.hpp"

namespace tmforge::decontam {

enum class Combine { kMax, kMean };

std::string_view to_string(Combine c);
Combine parse_combine(std::string_view s);

struct DecontamConfig {
  double threshold = 0.75;
  std::size_t ngram_order = 5;
  Combine combine = Combine::kMax;

  void validate() const;
};

/// One verdict per test unit.
///
/// For a dropped unit the reported train unit is the exact argmax of the
/// combined score over the whole train set (ties: earliest train unit). For a
/// kept unit every pair is at or below the threshold; the reported train unit
/// is the one with the highest n-gram similarity (ties: earliest), or empty
/// when no train unit shares an n-gram.
struct SimilarityVerdict {
  std::string test_unit_id;
  std::string best_train_unit_id;
  double lev_sim = 0.0;
  double ngram_sim = 0.0;
  double combined = 0.0;
  bool dropped = false;

  bool operator==(const SimilarityVerdict&) const = default;
};

// --- pairwise measures ------------------------------------------------------

/// Edit distance over Unicode scalar values. Inputs must be valid UTF-8.
std::size_t lev_distance(std::string_view a, std::string_view b);
std::size_t lev_distance(std::u32string_view a, std::u32string_view b);

/// Exact distance if it is <= max_dist, otherwise some value > max_dist.
std::size_t lev_distance_bounded(std::u32string_view a, std::u32string_view b, std::size_t max_dist);

/// 1 - d / max(|a|, |b|); 1 when both are empty.
double lev_similarity(std::string_view a, std::string_view b);
double lev_similarity_from_distance(std::size_t distance, std::size_t len_a, std::size_t len_b);

/// Jaccard over sets of contiguous word n-grams (whitespace tokens). The
/// order drops to min(words(a), words(b)) when either side is shorter than n.
/// 0 if exactly one side is empty, 1 if both are.
double ngram_similarity(std::string_view a, std::string_view b, std::size_t n);

double combine(double lev_sim, double ngram_sim, Combine mode);
double combined_similarity(std::string_view a, std::string_view b, const DecontamConfig& config);

// --- index ------------------------------------------------------------------

/// Inverted word-n-gram index over train sources plus the per-unit data the
/// candidate filters need (code points, length-sorted order, character
/// histograms). Immutable after construction; safe to query from many threads.
class NgramIndex {
 public:
  NgramIndex(const Corpus& train, std::size_t n);
  ~NgramIndex();
  NgramIndex(NgramIndex&&) noexcept;
  NgramIndex& operator=(NgramIndex&&) noexcept;

  std::size_t order() const;
  std::size_t unit_count() const;

  /// Train unit indices whose source contains `gram` (exactly `order()` tokens),
  /// ascending. Empty when the gram is unknown.
  std::vector<std::uint32_t> postings(std::span<const std::string> gram) const;

  /// Number of distinct order-n keys and total (key, unit) postings.
  std::size_t key_count() const;
  std::size_t total_postings() const;

  /// Train unit indices whose source length (code points) is `length`.
  std::span<const std::uint32_t> units_with_length(std::size_t length) const;

  struct Impl;
  const Impl& impl() const { return *impl_; }

 private:
  std::unique_ptr<Impl> impl_;
};

NgramIndex build_ngram_index(const Corpus& train, std::size_t n);

struct DecontamResult {
  Corpus kept;
  std::vector<SimilarityVerdict> verdicts;  // sorted by test unit id
  std::vector<DropRecord> drops;            // test order
};

/// Drops a test unit iff some train unit has combined similarity strictly
/// greater than the threshold (source texts only). Candidates are the train
/// units sharing a word n-gram plus those in the admissible length band;
/// band members are filtered by a character-histogram lower bound and then
/// verified with a bounded edit distance. `threads` = 0 uses hardware
/// concurrency.
DecontamResult decontaminate(const Corpus& test, const Corpus& train, const DecontamConfig& config = {},
                             unsigned threads = 0);
DecontamResult decontaminate(const Corpus& test, const NgramIndex& index, const Corpus& train,
                             const DecontamConfig& config, unsigned threads = 0);

std::string verdict_to_json_line(const SimilarityVerdict& v);
SimilarityVerdict verdict_from_json_line(std::string_view line);
void write_verdicts(const std::filesystem::path& path, const std::vector<SimilarityVerdict>& verdicts);

}  // namespace tmforge::decontam
