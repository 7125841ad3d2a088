#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tmforge {

/// BCP-47-style tag limited to `primary ("-" region)?`.
///
/// The primary subtag is stored lowercase; a two-letter region is stored
/// uppercase ("pt-br" -> "pt-BR"), longer regions keep their spelling. Two tags
/// compare equal when their canonical forms match.
class LangTag {
 public:
  LangTag() = default;

  /// Throws ValidationError on an empty or malformed tag.
  static LangTag parse(std::string_view code);

  const std::string& code() const { return code_; }
  std::string_view primary() const;
  std::string_view region() const;

  auto operator<=>(const LangTag&) const = default;

 private:
  explicit LangTag(std::string code) : code_(std::move(code)) {}
  std::string code_;
};

enum class Domain { kKnowledgeBase, kMobileUi, kMobileReference, kOther };

std::string_view to_string(Domain d);
Domain parse_domain(std::string_view s);

struct Provenance {
  std::string origin_file;
  Domain domain = Domain::kOther;

  bool operator==(const Provenance&) const = default;
};

struct TransUnit {
  std::string id;
  std::string source;
  LangTag source_lang;
  std::map<LangTag, std::string> targets;
  Provenance provenance;

  bool operator==(const TransUnit&) const = default;

  /// Target text for `lang`, or nullptr.
  const std::string* target(const LangTag& lang) const;
};

/// Non-empty source after trimming, no empty target values.
bool satisfies_invariants(const TransUnit& unit);

/// Ordered units plus the set of target languages they cover.
///
/// `languages` is derived from the units and kept in sync by `push_back`
/// and the constructor; it is not settable directly.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<TransUnit> units);

  const std::vector<TransUnit>& units() const { return units_; }
  const std::set<LangTag>& languages() const { return languages_; }
  std::size_t size() const { return units_.size(); }
  bool empty() const { return units_.empty(); }
  const TransUnit& operator[](std::size_t i) const { return units_[i]; }

  void push_back(TransUnit unit);

  /// Free-form key/value metadata. Not part of equality or the digest.
  std::map<std::string, std::string> metadata;

  /// Structural equality over units (and therefore languages).
  bool operator==(const Corpus& other) const { return units_ == other.units_; }

  /// Throws ValidationError if two units share an id.
  void check_unique_ids() const;

 private:
  std::vector<TransUnit> units_;
  std::set<LangTag> languages_;
};

inline constexpr std::string_view kDigestAlgorithm = "sha256";

/// SHA-256 over length-prefixed ids, sources and (lang, text) targets in
/// sequence order. Lower-case hex.
std::string corpus_digest(const Corpus& corpus);

/// SHA-256 of arbitrary bytes, lower-case hex.
std::string sha256_hex(std::string_view bytes);

enum class DropRule {
  kDuplicate,
  kSourceCopy,
  kOverLength,
  kNonContent,
  kEmptyAfterClean,
  kMissingTarget,
  kContaminated,
};

std::string_view to_string(DropRule r);
DropRule parse_drop_rule(std::string_view s);

struct DropRecord {
  std::string unit_id;
  DropRule rule;
  std::string detail;

  bool operator==(const DropRecord&) const = default;
};

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;

  bool operator==(const SplitRatios&) const = default;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t dev = 0;
  std::size_t test = 0;

  bool operator==(const SplitCounts&) const = default;
};

/// Reproducibility record for shuffle, split and subsetting. Besides the
/// core fields it carries the identifiers of every algorithmic choice that
/// affects output, so manifests produced by different builds can be compared.
struct SplitManifest {
  std::uint64_t seed = 0;
  SplitRatios ratios;
  SplitCounts counts;
  std::vector<std::size_t> subset_sizes;
  std::string checksum;  // corpus_digest of the unshuffled input
  std::string digest_algorithm{kDigestAlgorithm};
  std::string prng;
  std::map<std::string, std::string> choices;

  bool operator==(const SplitManifest&) const = default;
};

// --- canonical file formats -------------------------------------------------

/// One TransUnit per line as a JSON object with keys id, source, source_lang,
/// targets, provenance. Keys are written in that order; targets by tag order.
std::string unit_to_json_line(const TransUnit& unit);
TransUnit unit_from_json_line(std::string_view line);

void write_corpus(const std::filesystem::path& path, const Corpus& corpus);
Corpus read_corpus(const std::filesystem::path& path);
std::string corpus_to_jsonl(const Corpus& corpus);
Corpus corpus_from_jsonl(std::string_view data);

void write_drop_log(const std::filesystem::path& path, const std::vector<DropRecord>& drops);
std::vector<DropRecord> read_drop_log(const std::filesystem::path& path);
std::string drop_record_to_json_line(const DropRecord& record);

std::string manifest_to_json(const SplitManifest& manifest);
SplitManifest manifest_from_json(std::string_view json);
void write_manifest(const std::filesystem::path& path, const SplitManifest& manifest);
SplitManifest read_manifest(const std::filesystem::path& path);

// --- small file helpers used across modules ---------------------------------

/// Reads a whole file; throws IoError.
std::string read_file(const std::filesystem::path& path);
/// Writes a whole file, creating parent directories; throws IoError.
void write_file(const std::filesystem::path& path, std::string_view data);
/// Splits on '\n', dropping a trailing '\r' and blank lines; yields (1-based line no, text).
std::vector<std::pair<std::size_t, std::string_view>> nonblank_lines(std::string_view data);

}  // namespace tmforge
