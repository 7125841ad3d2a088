#include "tmforge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "tmforge/error.hpp"
#include "tmforge/text.hpp"

namespace tmforge {

using nlohmann::ordered_json;

namespace {

bool is_ascii_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ascii_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

LangTag LangTag::parse(std::string_view code) {
  const std::string_view trimmed = text::strip(code);
  if (trimmed.empty()) throw ValidationError("empty language tag");
  const std::size_t dash = trimmed.find_first_of("-_");
  std::string_view primary = trimmed.substr(0, dash);
  std::string_view region =
      dash == std::string_view::npos ? std::string_view{} : trimmed.substr(dash + 1);

  const bool primary_ok = primary.size() >= 2 && primary.size() <= 8 &&
                          std::all_of(primary.begin(), primary.end(), is_ascii_alpha);
  const bool region_ok = dash == std::string_view::npos ||
                         (!region.empty() && region.size() <= 8 &&
                          std::all_of(region.begin(), region.end(), is_ascii_alnum));
  if (!primary_ok || !region_ok) {
    throw ValidationError("malformed language tag '" + std::string(code) + "'");
  }

  std::string canonical;
  for (char c : primary) canonical.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (!region.empty()) {
    canonical.push_back('-');
    const bool upper = region.size() == 2 && std::all_of(region.begin(), region.end(), is_ascii_alpha);
    for (char c : region) {
      canonical.push_back(upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(c))) : c);
    }
  }
  return LangTag(std::move(canonical));
}

std::string_view LangTag::primary() const {
  const std::string_view v = code_;
  return v.substr(0, v.find('-'));
}

std::string_view LangTag::region() const {
  const std::size_t dash = code_.find('-');
  return dash == std::string::npos ? std::string_view{} : std::string_view(code_).substr(dash + 1);
}

std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::kKnowledgeBase: return "knowledge-base";
    case Domain::kMobileUi: return "mobile-ui";
    case Domain::kMobileReference: return "mobile-reference";
    case Domain::kOther: return "other";
  }
  return "other";
}

Domain parse_domain(std::string_view s) {
  if (s == "knowledge-base") return Domain::kKnowledgeBase;
  if (s == "mobile-ui") return Domain::kMobileUi;
  if (s == "mobile-reference") return Domain::kMobileReference;
  if (s == "other") return Domain::kOther;
  throw ValidationError("unknown domain tag '" + std::string(s) + "'");
}

const std::string* TransUnit::target(const LangTag& lang) const {
  const auto it = targets.find(lang);
  return it == targets.end() ? nullptr : &it->second;
}

bool satisfies_invariants(const TransUnit& unit) {
  if (text::strip(unit.source).empty()) return false;
  return std::none_of(unit.targets.begin(), unit.targets.end(),
                      [](const auto& kv) { return kv.second.empty(); });
}

Corpus::Corpus(std::vector<TransUnit> units) : units_(std::move(units)) {
  for (const auto& u : units_) {
    for (const auto& [lang, _] : u.targets) languages_.insert(lang);
  }
}

void Corpus::push_back(TransUnit unit) {
  for (const auto& [lang, _] : unit.targets) languages_.insert(lang);
  units_.push_back(std::move(unit));
}

void Corpus::check_unique_ids() const {
  std::unordered_set<std::string_view> seen;
  seen.reserve(units_.size());
  for (const auto& u : units_) {
    if (!seen.insert(u.id).second) throw ValidationError("duplicate unit id '" + u.id + "'");
  }
}

// --- digest -----------------------------------------------------------------

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      EVP_MD_CTX_free(ctx_);
      throw Error(ErrorKind::kInternal, "sha256 init failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::string_view bytes) {
    if (!bytes.empty()) EVP_DigestUpdate(ctx_, bytes.data(), bytes.size());
  }

  void update_field(std::string_view bytes) {
    std::uint64_t n = bytes.size();
    unsigned char len[8];
    for (int i = 7; i >= 0; --i) {
      len[i] = static_cast<unsigned char>(n & 0xFF);
      n >>= 8;
    }
    EVP_DigestUpdate(ctx_, len, sizeof(len));
    update(bytes);
  }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int n = 0;
    EVP_DigestFinal_ex(ctx_, md, &n);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * n);
    for (unsigned int i = 0; i < n; ++i) {
      out.push_back(kHex[md[i] >> 4]);
      out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes);
  return h.hex();
}

std::string corpus_digest(const Corpus& corpus) {
  Sha256 h;
  for (const auto& u : corpus.units()) {
    h.update_field(u.id);
    h.update_field(u.source);
    h.update_field(std::to_string(u.targets.size()));
    for (const auto& [lang, t] : u.targets) {
      h.update_field(lang.code());
      h.update_field(t);
    }
  }
  return h.hex();
}

std::string_view to_string(DropRule r) {
  switch (r) {
    case DropRule::kDuplicate: return "duplicate";
    case DropRule::kSourceCopy: return "source-copy";
    case DropRule::kOverLength: return "over-length";
    case DropRule::kNonContent: return "non-content";
    case DropRule::kEmptyAfterClean: return "empty-after-clean";
    case DropRule::kMissingTarget: return "missing-target";
    case DropRule::kContaminated: return "contaminated";
  }
  return "duplicate";
}

DropRule parse_drop_rule(std::string_view s) {
  for (DropRule r : {DropRule::kDuplicate, DropRule::kSourceCopy, DropRule::kOverLength,
                     DropRule::kNonContent, DropRule::kEmptyAfterClean, DropRule::kMissingTarget,
                     DropRule::kContaminated}) {
    if (to_string(r) == s) return r;
  }
  throw ValidationError("unknown drop rule '" + std::string(s) + "'");
}

// --- serialization ----------------------------------------------------------

namespace {

std::string dump(const ordered_json& j) {
  // Strict: invalid UTF-8 must have been rejected upstream.
  return j.dump();
}

ordered_json parse_json(std::string_view line, std::string_view what) {
  try {
    return ordered_json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what(), e.byte > 0 ? e.byte - 1 : 0);
  }
}

const ordered_json& require(const ordered_json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing key '") + key + "'");
  return *it;
}

std::string require_string(const ordered_json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw ValidationError(std::string("key '") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

std::string unit_to_json_line(const TransUnit& unit) {
  ordered_json j;
  j["id"] = unit.id;
  j["source"] = unit.source;
  j["source_lang"] = unit.source_lang.code();
  ordered_json targets = ordered_json::object();
  for (const auto& [lang, t] : unit.targets) targets[lang.code()] = t;
  j["targets"] = std::move(targets);
  j["provenance"] = {{"origin_file", unit.provenance.origin_file},
                     {"domain", to_string(unit.provenance.domain)}};
  return dump(j);
}

TransUnit unit_from_json_line(std::string_view line) {
  const ordered_json j = parse_json(line, "corpus record");
  if (!j.is_object()) throw ValidationError("corpus record must be a JSON object");
  TransUnit u;
  u.id = require_string(j, "id");
  u.source = require_string(j, "source");
  u.source_lang = LangTag::parse(require_string(j, "source_lang"));
  const auto& targets = require(j, "targets");
  if (!targets.is_object()) throw ValidationError("'targets' must be an object");
  for (const auto& [k, v] : targets.items()) {
    if (!v.is_string()) throw ValidationError("target '" + k + "' must be a string");
    u.targets.emplace(LangTag::parse(k), v.get<std::string>());
  }
  if (const auto it = j.find("provenance"); it != j.end() && it->is_object()) {
    if (const auto f = it->find("origin_file"); f != it->end() && f->is_string()) {
      u.provenance.origin_file = f->get<std::string>();
    }
    if (const auto d = it->find("domain"); d != it->end() && d->is_string()) {
      u.provenance.domain = parse_domain(d->get<std::string>());
    }
  }
  return u;
}

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& u : corpus.units()) {
    out += unit_to_json_line(u);
    out.push_back('\n');
  }
  return out;
}

Corpus corpus_from_jsonl(std::string_view data) {
  data = text::strip_bom(data);
  if (const std::size_t bad = text::find_invalid_utf8(data); bad != std::string_view::npos) {
    throw ParseError("malformed UTF-8 at byte offset " + std::to_string(bad), bad);
  }
  Corpus c;
  for (const auto& [lineno, line] : nonblank_lines(data)) {
    try {
      c.push_back(unit_from_json_line(line));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  c.check_unique_ids();
  return c;
}

void write_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  write_file(path, corpus_to_jsonl(corpus));
}

Corpus read_corpus(const std::filesystem::path& path) {
  try {
    return corpus_from_jsonl(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.offset());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string drop_record_to_json_line(const DropRecord& record) {
  ordered_json j;
  j["unit_id"] = record.unit_id;
  j["rule"] = to_string(record.rule);
  j["detail"] = record.detail;
  return dump(j);
}

void write_drop_log(const std::filesystem::path& path, const std::vector<DropRecord>& drops) {
  std::string out;
  for (const auto& d : drops) {
    out += drop_record_to_json_line(d);
    out.push_back('\n');
  }
  write_file(path, out);
}

std::vector<DropRecord> read_drop_log(const std::filesystem::path& path) {
  std::vector<DropRecord> out;
  const std::string data = read_file(path);
  for (const auto& [lineno, line] : nonblank_lines(data)) {
    const ordered_json j = parse_json(line, "drop record");
    out.push_back({require_string(j, "unit_id"), parse_drop_rule(require_string(j, "rule")),
                   require_string(j, "detail")});
  }
  return out;
}

std::string manifest_to_json(const SplitManifest& m) {
  ordered_json j;
  j["seed"] = m.seed;
  j["prng"] = m.prng;
  j["ratios"] = {{"train", m.ratios.train}, {"dev", m.ratios.dev}, {"test", m.ratios.test}};
  j["counts"] = {{"train", m.counts.train}, {"dev", m.counts.dev}, {"test", m.counts.test}};
  j["subset_sizes"] = m.subset_sizes;
  j["checksum"] = m.checksum;
  j["digest_algorithm"] = m.digest_algorithm;
  ordered_json choices = ordered_json::object();
  for (const auto& [k, v] : m.choices) choices[k] = v;
  j["choices"] = std::move(choices);
  return j.dump(2) + "\n";
}

SplitManifest manifest_from_json(std::string_view json) {
  const ordered_json j = parse_json(json, "manifest");
  SplitManifest m;
  try {
    m.seed = require(j, "seed").get<std::uint64_t>();
    const auto& r = require(j, "ratios");
    m.ratios = {r.at("train").get<double>(), r.at("dev").get<double>(), r.at("test").get<double>()};
    const auto& c = require(j, "counts");
    m.counts = {c.at("train").get<std::size_t>(), c.at("dev").get<std::size_t>(),
                c.at("test").get<std::size_t>()};
    m.subset_sizes = require(j, "subset_sizes").get<std::vector<std::size_t>>();
    m.checksum = require_string(j, "checksum");
    m.digest_algorithm = require_string(j, "digest_algorithm");
    if (j.contains("prng")) m.prng = j["prng"].get<std::string>();
    if (j.contains("choices")) {
      for (const auto& [k, v] : j["choices"].items()) m.choices[k] = v.get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  if (m.digest_algorithm != kDigestAlgorithm) {
    throw ValidationError("manifest digest algorithm '" + m.digest_algorithm +
                          "' does not match this build ('" + std::string(kDigestAlgorithm) + "')");
  }
  return m;
}

void write_manifest(const std::filesystem::path& path, const SplitManifest& manifest) {
  write_file(path, manifest_to_json(manifest));
}

SplitManifest read_manifest(const std::filesystem::path& path) {
  return manifest_from_json(read_file(path));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return std::move(ss).str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<std::pair<std::size_t, std::string_view>> nonblank_lines(std::string_view data) {
  std::vector<std::pair<std::size_t, std::string_view>> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= data.size()) {
    const std::size_t nl = data.find('\n', pos);
    std::string_view line = data.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!text::strip(line).empty()) out.emplace_back(lineno, line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

}  // namespace tmforge
