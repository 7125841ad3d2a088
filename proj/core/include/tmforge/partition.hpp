#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "tmforge/corpus.hpp"

namespace tmforge::partition {

/// SplitMix64 (Steele, Lea & Flood 2014): the i-th output is a fixed mix of
/// seed + i * 0x9E3779B97F4A7C15, so the stream is fully determined by the seed.
class SplitMix64 {
 public:
  static constexpr std::string_view kName = "splitmix64";

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform integer in [0, bound) by rejection; bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

/// Identifier recorded in manifests: generator plus shuffle procedure.
inline constexpr std::string_view kShuffleId = "splitmix64/fisher-yates-descending/rejection";

/// Corpus whose every unit has a non-empty translation for every language in `languages`.
struct AlignedCorpus {
  Corpus corpus;
  std::vector<LangTag> languages;
};

struct AlignResult {
  AlignedCorpus aligned;
  std::vector<DropRecord> drops;
};

/// Joins per-language corpora on identical whitespace-normalized source text.
/// Output order follows the corpus of the first language (map order); the id
/// and provenance come from that corpus. Sources missing in any language are
/// reported as missing-target. Within one language the first translation of a
/// source wins; later differing ones are logged.
AlignResult interlingual_align(const std::map<LangTag, Corpus>& corpora);

/// Fisher-Yates over a SplitMix64 stream.
Corpus seeded_shuffle(const Corpus& corpus, std::uint64_t seed);

struct SplitResult {
  Corpus train;
  Corpus dev;
  Corpus test;
  SplitManifest manifest;
};

/// dev = ceil(dev_ratio * N), test = ceil(test_ratio * N), train = rest;
/// contiguous slices train | dev | test. Requires N >= 3 and a non-empty train.
SplitCounts split_counts(std::size_t n, const SplitRatios& ratios);
SplitResult split(const Corpus& corpus, const SplitRatios& ratios = {});

/// Prefixes of `train`; sizes must be strictly ascending, >= 1, <= |train|.
std::vector<Corpus> nested_subsets(const Corpus& train, const std::vector<std::size_t>& sizes);

/// Units of corpora[lang] whose normalized source occurs in neither dev nor test.
Corpus full_language_extract(const std::map<LangTag, Corpus>& corpora, const Corpus& aligned_dev,
                             const Corpus& aligned_test, const LangTag& lang);

void validate_ratios(const SplitRatios& ratios);

}  // namespace tmforge::partition
