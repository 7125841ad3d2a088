#include "tmforge/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "tmforge/error.hpp"
#include "tmforge/promptkit.hpp"
#include "tmforge/text.hpp"

namespace tmforge::metrics {

void MetricConfig::validate() const {
  if (bleu.max_ngram_order < 1) throw ValidationError("bleu.max_ngram_order must be >= 1");
  if (bleu.tokenizer != "13a" && bleu.tokenizer != "none") {
    throw ValidationError("bleu.tokenizer must be 13a or none");
  }
  if (bleu.smoothing != "exp" && bleu.smoothing != "none") {
    throw ValidationError("bleu.smoothing must be exp or none");
  }
  if (chrf.char_order < 1) throw ValidationError("chrf.char_order must be >= 1");
  if (chrf.word_order < 0) throw ValidationError("chrf.word_order must be >= 0");
  if (!(chrf.beta > 0)) throw ValidationError("chrf.beta must be > 0");
  if (ter.max_shift_distance < 0) throw ValidationError("ter.max_shift_distance must be >= 0");
  if (ter.max_shift_size < 1) throw ValidationError("ter.max_shift_size must be >= 1");
}

double MetricReport::count(std::string_view key) const {
  for (const auto& [k, v] : counts) {
    if (k == key) return v;
  }
  throw std::out_of_range("no count named " + std::string(key));
}

namespace {

nlohmann::ordered_json report_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["score"] = r.score;
  j["signature"] = r.signature;
  j["counts"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.counts) j["counts"][k] = v;
  j["input_digest"] = r.input_digest;
  return j;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

void check_inputs(const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
  if (hyps.size() != refs.size()) {
    throw ValidationError("hypothesis/reference count mismatch: " + std::to_string(hyps.size()) + " vs " +
                          std::to_string(refs.size()));
  }
  if (hyps.empty()) throw ValidationError("no hypotheses to score");
}

// Per-pair statistics in parallel; summed in index order afterwards.
template <typename Stats, typename Fn>
Stats sum_stats(std::size_t n, unsigned threads, Fn fn) {
  std::vector<Stats> parts(n);
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) parts[i] = fn(i);
  } else {
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex m;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < n; i += threads) parts[i] = fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  Stats total{};
  for (const auto& p : parts) total += p;
  return total;
}

}  // namespace

std::string MetricReport::to_json() const { return report_json(*this).dump(2) + "\n"; }

std::string reports_to_json(const std::vector<MetricReport>& reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2) + "\n";
}

std::string bleu_signature(const BleuConfig& c) {
  return std::string("nrefs:1|case:") + (c.case_sensitive ? "mixed" : "lc") + "|eff:no|tok:" + c.tokenizer +
         "|smooth:" + c.smoothing + "|order:" + std::to_string(c.max_ngram_order) + "|impl:tmforge-" TMFORGE_VERSION;
}

std::string chrf_signature(const ChrfConfig& c) {
  return "nrefs:1|case:mixed|eff:yes|nc:" + std::to_string(c.char_order) + "|nw:" + std::to_string(c.word_order) +
         "|beta:" + format_number(c.beta) + "|space:no|impl:tmforge-" TMFORGE_VERSION;
}

std::string ter_signature(const TerConfig& c) {
  return std::string("nrefs:1|case:") + (c.case_insensitive ? "lc" : "mixed") +
         "|tok:tercom|norm:" + (c.normalized ? "yes" : "no") + "|punct:" + (c.no_punct ? "no" : "yes") +
         "|asian:no|shift-dist:" + std::to_string(c.max_shift_distance) +
         "|shift-size:" + std::to_string(c.max_shift_size) + "|impl:tmforge-" TMFORGE_VERSION;
}

std::string pairs_digest(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references) {
  std::string buf;
  auto add = [&buf](std::string_view s) {
    buf += std::to_string(s.size());
    buf.push_back(':');
    buf.append(s);
  };
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    add(hypotheses[i]);
    add(i < references.size() ? references[i] : std::string_view{});
  }
  return sha256_hex(buf);
}

MetricReport bleu(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                  const BleuConfig& config, unsigned threads) {
  check_inputs(hyps, refs);
  const BleuStats stats = sum_stats<BleuStats>(
      hyps.size(), threads, [&](std::size_t i) { return bleu_sentence_stats(hyps[i], refs[i], config); });
  const BleuResult r = bleu_from_stats(stats, config);
  MetricReport rep;
  rep.name = "BLEU";
  rep.score = r.score;
  rep.signature = bleu_signature(config);
  for (std::size_t n = 0; n < stats.correct.size(); ++n) {
    rep.counts.emplace_back("correct_" + std::to_string(n + 1), static_cast<double>(stats.correct[n]));
    rep.counts.emplace_back("total_" + std::to_string(n + 1), static_cast<double>(stats.total[n]));
  }
  rep.counts.emplace_back("sys_len", static_cast<double>(stats.sys_len));
  rep.counts.emplace_back("ref_len", static_cast<double>(stats.ref_len));
  rep.counts.emplace_back("brevity_penalty", r.brevity_penalty);
  rep.input_digest = pairs_digest(hyps, refs);
  return rep;
}

MetricReport chrf_pp(const std::vector<std::string>& hyps, const std::vector<std::string>& refs,
                     const ChrfConfig& config, unsigned threads) {
  check_inputs(hyps, refs);
  const ChrfStats stats = sum_stats<ChrfStats>(
      hyps.size(), threads, [&](std::size_t i) { return chrf_sentence_stats(hyps[i], refs[i], config); });
  MetricReport rep;
  rep.name = "chrF++";
  rep.score = chrf_from_stats(stats, config);
  rep.signature = chrf_signature(config);
  for (std::size_t i = 0; i < stats.hyp.size(); ++i) {
    const bool is_char = i < static_cast<std::size_t>(config.char_order);
    const std::string tag = (is_char ? "char_" : "word_") +
                            std::to_string(is_char ? i + 1 : i + 1 - static_cast<std::size_t>(config.char_order));
    rep.counts.emplace_back(tag + "_hyp", static_cast<double>(stats.hyp[i]));
    rep.counts.emplace_back(tag + "_ref", static_cast<double>(stats.ref[i]));
    rep.counts.emplace_back(tag + "_match", static_cast<double>(stats.match[i]));
  }
  rep.input_digest = pairs_digest(hyps, refs);
  return rep;
}

MetricReport ter(const std::vector<std::string>& hyps, const std::vector<std::string>& refs, const TerConfig& config,
                 unsigned threads) {
  check_inputs(hyps, refs);
  const TerStats stats = sum_stats<TerStats>(
      hyps.size(), threads, [&](std::size_t i) { return ter_sentence_stats(hyps[i], refs[i], config); });
  MetricReport rep;
  rep.name = "TER";
  rep.score = ter_from_stats(stats);
  rep.signature = ter_signature(config);
  rep.counts.emplace_back("edits", static_cast<double>(stats.edits));
  rep.counts.emplace_back("shifts", static_cast<double>(stats.shifts));
  rep.counts.emplace_back("ref_len", static_cast<double>(stats.ref_len));
  rep.counts.emplace_back("empty_reference_guard", stats.ref_len == 0 && stats.edits > 0 ? 1.0 : 0.0);
  rep.input_digest = pairs_digest(hyps, refs);
  return rep;
}

std::vector<Segment> read_segments(const std::filesystem::path& path, const std::optional<LangTag>& lang) {
  const std::string data = read_file(path);
  std::vector<Segment> out;
  std::set<std::string> seen;
  for (const auto& [line_no, line] : nonblank_lines(text::strip_bom(data))) {
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError(where + ": not a JSON object");
    if (!j.contains("id") || !j["id"].is_string()) throw ValidationError(where + ": missing string \"id\"");
    Segment s;
    s.id = j["id"].get<std::string>();
    if (j.contains("targets")) {
      const auto unit = unit_from_json_line(line);
      if (lang) {
        const std::string* t = unit.target(*lang);
        if (t == nullptr) throw ValidationError(where + ": no target for " + lang->code());
        s.text = *t;
      } else if (unit.targets.size() == 1) {
        s.text = unit.targets.begin()->second;
      } else {
        throw ValidationError(where + ": unit has several targets; a language is required");
      }
    } else if (j.contains("translation") && j["translation"].is_string()) {
      s.text = j["translation"].get<std::string>();
    } else if (j.contains("text") && j["text"].is_string()) {
      s.text = j["text"].get<std::string>();
    } else if (j.contains("output") && j["output"].is_string()) {
      s.text = promptkit::extract_translation(j["output"].get<std::string>());
    } else {
      throw ValidationError(where + ": expected \"targets\", \"translation\", \"text\" or \"output\"");
    }
    if (!seen.insert(s.id).second) throw ValidationError(where + ": duplicate id '" + s.id + "'");
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<MetricReport> score_segments(const std::vector<Segment>& hyps, const std::vector<Segment>& refs,
                                         const MetricConfig& config, unsigned threads) {
  config.validate();
  std::unordered_map<std::string_view, const std::string*> by_id;
  for (const auto& h : hyps) by_id.emplace(h.id, &h.text);
  std::vector<std::string> missing_hyp;
  std::vector<std::string> hyp_text;
  std::vector<std::string> ref_text;
  std::set<std::string_view> ref_ids;
  for (const auto& r : refs) {
    ref_ids.insert(r.id);
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) {
      missing_hyp.push_back(r.id);
      continue;
    }
    hyp_text.push_back(*it->second);
    ref_text.push_back(r.text);
  }
  std::vector<std::string> missing_ref;
  for (const auto& h : hyps) {
    if (ref_ids.count(h.id) == 0) missing_ref.push_back(h.id);
  }
  if (!missing_hyp.empty() || !missing_ref.empty()) {
    auto list = [](const std::vector<std::string>& ids) {
      std::string s;
      for (std::size_t i = 0; i < ids.size() && i < 20; ++i) s += (i ? ", " : "") + ids[i];
      if (ids.size() > 20) s += ", ... (" + std::to_string(ids.size()) + " total)";
      return s;
    };
    std::string msg = "id mismatch between hypothesis and reference files";
    if (!missing_hyp.empty()) msg += "; missing in hypotheses: " + list(missing_hyp);
    if (!missing_ref.empty()) msg += "; missing in references: " + list(missing_ref);
    throw ValidationError(msg);
  }
  return {bleu(hyp_text, ref_text, config.bleu, threads), chrf_pp(hyp_text, ref_text, config.chrf, threads),
          ter(hyp_text, ref_text, config.ter, threads)};
}

std::vector<MetricReport> score_run(const std::filesystem::path& hyp_file, const std::filesystem::path& ref_file,
                                    const MetricConfig& config, const std::optional<LangTag>& lang,
                                    unsigned threads) {
  return score_segments(read_segments(hyp_file, lang), read_segments(ref_file, lang), config, threads);
}

}  // namespace tmforge::metrics
