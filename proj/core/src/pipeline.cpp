#include "tmforge/pipeline.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include <nlohmann/json.hpp>

#include "tmforge/error.hpp"
#include "tmforge/ingest.hpp"
#include "tmforge/log.hpp"
#include "tmforge/partition.hpp"

#ifndef TMFORGE_VERSION
#define TMFORGE_VERSION "0.0.0"
#endif

namespace tmforge::pipeline {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Object view that rejects keys nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ValidationError(name_ + ": expected an object");
  }
  ~Section() = default;

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() || it->is_null() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ValidationError(name_ + ": unknown key \"" + it.key() + "\"");
    }
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ValidationError(path(key) + ": expected a boolean");
    return v->get<bool>();
  }

  double number(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ValidationError(path(key) + ": expected a number");
    return v->get<double>();
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number_unsigned()) throw ValidationError(path(key) + ": expected a non-negative integer");
    return v->get<std::uint64_t>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ValidationError(path(key) + ": expected a string");
    return v->get<std::string>();
  }

  std::string path(const std::string& key) const { return name_ + "." + key; }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what(), e.byte);
  }
}

int to_int(std::uint64_t v, const std::string& what) {
  if (v > 1000000) throw ValidationError(what + ": value out of range");
  return static_cast<int>(v);
}

curate::CurationConfig curation_from(const json& j) {
  Section s(j, "curation");
  curate::CurationConfig c;
  c.max_words = s.unsigned_int("max_words", c.max_words);
  c.drop_duplicates = s.boolean("drop_duplicates", c.drop_duplicates);
  c.drop_source_copies = s.boolean("drop_source_copies", c.drop_source_copies);
  c.drop_noncontent = s.boolean("drop_noncontent", c.drop_noncontent);
  s.finish();
  c.validate();
  return c;
}

decontam::DecontamConfig decontam_from(const json& j, bool* against_full) {
  Section s(j, "decontam");
  decontam::DecontamConfig c;
  c.threshold = s.number("threshold", c.threshold);
  c.ngram_order = s.unsigned_int("ngram_order", c.ngram_order);
  c.combine = decontam::parse_combine(s.string("combine", std::string(decontam::to_string(c.combine))));
  const std::string against = s.string("against", "train+full");
  if (against == "train+full") {
    if (against_full) *against_full = true;
  } else if (against == "train") {
    if (against_full) *against_full = false;
  } else {
    throw ValidationError("decontam.against: expected \"train\" or \"train+full\"");
  }
  s.finish();
  c.validate();
  return c;
}

metrics::MetricConfig metrics_from(const json& j) {
  Section s(j, "metrics");
  metrics::MetricConfig c;
  if (const json* b = s.get("bleu")) {
    Section bs(*b, "metrics.bleu");
    c.bleu.max_ngram_order = to_int(bs.unsigned_int("max_ngram_order", 4), "metrics.bleu.max_ngram_order");
    c.bleu.tokenizer = bs.string("tokenize", c.bleu.tokenizer);
    c.bleu.case_sensitive = !bs.boolean("lowercase", !c.bleu.case_sensitive);
    c.bleu.smoothing = bs.string("smooth", c.bleu.smoothing);
    bs.finish();
  }
  if (const json* ch = s.get("chrf")) {
    Section cs(*ch, "metrics.chrf");
    c.chrf.char_order = to_int(cs.unsigned_int("char_order", 6), "metrics.chrf.char_order");
    c.chrf.word_order = to_int(cs.unsigned_int("word_order", 2), "metrics.chrf.word_order");
    c.chrf.beta = cs.number("beta", c.chrf.beta);
    cs.finish();
  }
  if (const json* t = s.get("ter")) {
    Section ts(*t, "metrics.ter");
    c.ter.normalized = ts.boolean("normalized", c.ter.normalized);
    c.ter.case_insensitive = !ts.boolean("case_sensitive", !c.ter.case_insensitive);
    c.ter.no_punct = ts.boolean("no_punct", c.ter.no_punct);
    c.ter.max_shift_distance = to_int(ts.unsigned_int("max_shift_distance", 50), "metrics.ter.max_shift_distance");
    c.ter.max_shift_size = to_int(ts.unsigned_int("max_shift_size", 10), "metrics.ter.max_shift_size");
    ts.finish();
  }
  s.finish();
  c.validate();
  return c;
}

std::string scalar_text(const json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  throw ValidationError(what + ": expected a scalar value");
}

template <typename Artifact>
void apply_overrides(const json& j, const std::string& name, Artifact& artifact) {
  if (!j.is_object()) throw ValidationError(name + ": expected an object of dotted keys");
  for (auto it = j.begin(); it != j.end(); ++it) {
    artifact.set(it.key(), scalar_text(it.value(), name + "." + it.key()));
  }
}

InputSpec input_from(const json& j, std::size_t index) {
  const std::string name = "inputs[" + std::to_string(index) + "]";
  Section s(j, name);
  InputSpec in;
  const std::string path = s.string("path", "");
  if (path.empty()) throw ValidationError(name + ".path is required");
  in.path = path;
  in.format = parse_input_format(s.string("format", "tsv"));
  const std::string src = s.string("source_lang", "");
  if (src.empty()) throw ValidationError(name + ".source_lang is required");
  in.source_lang = LangTag::parse(src);
  const std::string tgt = s.string("target_lang", "");
  if (!tgt.empty()) in.target_lang = LangTag::parse(tgt);
  if (in.format == InputFormat::kTsv && !in.target_lang) {
    throw ValidationError(name + ".target_lang is required for tsv inputs");
  }
  in.domain = parse_domain(s.string("domain", std::string(to_string(Domain::kOther))));
  s.finish();
  return in;
}

[[noreturn]] void rethrow_in_stage(std::string_view stage) {
  const std::string prefix = "stage " + std::string(stage) + ": ";
  try {
    throw;
  } catch (const UsageError& e) {
    throw UsageError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(e.kind(), prefix + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::kInternal, prefix + e.what());
  }
}

// Artifact writer that remembers what it wrote.
class Tree {
 public:
  explicit Tree(fs::path root) : root_(std::move(root)) {}

  std::string put(const std::string& rel, std::string_view data) {
    write_file(root_ / rel, data);
    std::string digest = sha256_hex(data);
    files_[rel] = digest;
    return digest;
  }

  const std::map<std::string, std::string>& files() const { return files_; }

 private:
  fs::path root_;
  std::map<std::string, std::string> files_;
};

std::string drops_to_jsonl(const std::vector<DropRecord>& drops) {
  std::string out;
  for (const auto& d : drops) {
    out += drop_record_to_json_line(d);
    out += '\n';
  }
  return out;
}

std::string records_to_jsonl(const std::vector<promptkit::PromptRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += promptkit::record_to_json_line(r);
    out += '\n';
  }
  return out;
}

std::string digest_of_pairs(const std::map<std::string, std::string>& files) {
  std::string buf;
  for (const auto& [rel, digest] : files) {
    buf += rel;
    buf += '\0';
    buf += digest;
    buf += '\n';
  }
  return sha256_hex(buf);
}

// Single-target copy of `unit` for one language.
TransUnit narrowed(const TransUnit& unit, const LangTag& lang, const std::string& text) {
  TransUnit out = unit;
  out.targets.clear();
  out.targets.emplace(lang, text);
  return out;
}

std::vector<promptkit::PromptRecord> render_records(const Corpus& corpus, const LangTag& target,
                                                    promptkit::PromptKind kind, const std::string& src_name,
                                                    const std::string& tgt_name) {
  std::vector<promptkit::PromptRecord> out;
  out.reserve(corpus.size());
  for (const auto& u : corpus.units()) {
    const std::string* t = u.target(target);
    if (!t) throw ValidationError("unit " + u.id + " has no " + target.code() + " target");
    promptkit::PromptRecord r;
    r.unit_id = u.id;
    r.kind = kind;
    r.source_lang_name = src_name;
    r.target_lang_name = tgt_name;
    r.rendered = kind == promptkit::PromptKind::kInference
                     ? promptkit::render_inference_prompt(src_name, tgt_name, u.source)
                     : promptkit::render_training_example(src_name, tgt_name, u.source, *t);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

InputFormat parse_input_format(std::string_view s) {
  if (s == "tsv") return InputFormat::kTsv;
  if (s == "tmx") return InputFormat::kTmx;
  if (s == "jsonl") return InputFormat::kJsonl;
  throw ValidationError("unknown input format \"" + std::string(s) + "\" (expected tsv, tmx or jsonl)");
}

std::string_view to_string(InputFormat f) {
  switch (f) {
    case InputFormat::kTsv: return "tsv";
    case InputFormat::kTmx: return "tmx";
    case InputFormat::kJsonl: return "jsonl";
  }
  return "tsv";
}

fs::path PipelineConfig::resolve(const fs::path& p) const {
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

curate::CurationConfig parse_curation(std::string_view text) { return curation_from(parse_json(text, "curation")); }

decontam::DecontamConfig parse_decontam(std::string_view text) {
  return decontam_from(parse_json(text, "decontam"), nullptr);
}

metrics::MetricConfig parse_metrics(std::string_view text) { return metrics_from(parse_json(text, "metrics")); }

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  const json j = parse_json(text, "config");
  Section s(j, "config");
  PipelineConfig c;
  c.base_dir = base_dir;

  const json* split = s.get("split");
  if (!split) throw ValidationError("config.split.seed is required");
  {
    Section ss(*split, "split");
    const json* seed = ss.get("seed");
    if (!seed) throw ValidationError("split.seed is required");
    if (!seed->is_number_unsigned()) throw ValidationError("split.seed: expected a non-negative integer");
    c.seed = seed->get<std::uint64_t>();
    if (const json* r = ss.get("ratios")) {
      if (!r->is_array() || r->size() != 3 || !std::all_of(r->begin(), r->end(), [](const json& x) { return x.is_number(); })) {
        throw ValidationError("split.ratios: expected three numbers");
      }
      c.ratios = SplitRatios{(*r)[0].get<double>(), (*r)[1].get<double>(), (*r)[2].get<double>()};
    }
    if (const json* sz = ss.get("subset_sizes")) {
      if (!sz->is_array()) throw ValidationError("split.subset_sizes: expected an array");
      for (const auto& v : *sz) {
        if (!v.is_number_unsigned()) throw ValidationError("split.subset_sizes: expected non-negative integers");
        c.subset_sizes.push_back(v.get<std::size_t>());
      }
    }
    ss.finish();
    partition::validate_ratios(c.ratios);
  }

  const json* inputs = s.get("inputs");
  if (!inputs || !inputs->is_array() || inputs->empty()) throw ValidationError("config.inputs: expected a non-empty array");
  for (std::size_t i = 0; i < inputs->size(); ++i) c.inputs.push_back(input_from((*inputs)[i], i));

  if (const json* v = s.get("curation")) c.curation = curation_from(*v);
  if (const json* v = s.get("decontam")) c.decontam = decontam_from(*v, &c.decontam_against_full);
  if (const json* v = s.get("metrics")) c.metrics = metrics_from(*v);
  if (const json* v = s.get("prompts")) {
    Section ps(*v, "prompts");
    if (const json* names = ps.get("language_names")) {
      if (!names->is_object()) throw ValidationError("prompts.language_names: expected an object");
      for (auto it = names->begin(); it != names->end(); ++it) {
        if (!it->is_string() || it->get<std::string>().empty()) {
          throw ValidationError("prompts.language_names." + it.key() + ": expected a non-empty string");
        }
        c.language_names[LangTag::parse(it.key())] = it->get<std::string>();
      }
    }
    ps.finish();
  }
  if (const json* v = s.get("training")) apply_overrides(*v, "training", c.training);
  if (const json* v = s.get("inference")) apply_overrides(*v, "inference", c.inference);
  c.output_dir = s.string("output_dir", "");
  s.finish();
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

void validate_inputs(const PipelineConfig& config) {
  for (const auto& in : config.inputs) {
    const fs::path p = config.resolve(in.path);
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) throw IoError("input file not found: " + p.string());
  }
}

std::string prompt_language_name(const PipelineConfig& config, const LangTag& tag) {
  auto it = config.language_names.find(tag);
  if (it != config.language_names.end()) return it->second;
  return promptkit::language_name(tag);
}

std::map<LangTag, Corpus> ingest_inputs(const PipelineConfig& config) {
  std::map<LangTag, std::vector<TransUnit>> by_lang;
  for (const auto& in : config.inputs) {
    const fs::path p = config.resolve(in.path);
    ingest::Options opt;
    opt.domain = in.domain;
    Corpus parsed;
    switch (in.format) {
      case InputFormat::kTsv: parsed = ingest::parse_tsv(p, in.source_lang, *in.target_lang, opt); break;
      case InputFormat::kTmx: parsed = ingest::parse_tmx(p, opt); break;
      case InputFormat::kJsonl: parsed = read_corpus(p); break;
    }
    std::size_t skipped = 0;
    for (const auto& u : parsed.units()) {
      if (u.source_lang.primary() != in.source_lang.primary()) {
        throw ValidationError(p.string() + ": unit " + u.id + " has source language " + u.source_lang.code() +
                              ", expected " + in.source_lang.code());
      }
      bool used = false;
      for (const auto& [lang, text] : u.targets) {
        if (in.target_lang && lang != *in.target_lang) continue;
        TransUnit n = narrowed(u, lang, text);
        if (in.format != InputFormat::kJsonl) n.provenance.origin_file = in.path.generic_string();
        by_lang[lang].push_back(std::move(n));
        used = true;
      }
      if (!used) ++skipped;
    }
    if (skipped) log::warn("ingest.no_matching_target", {{"file", p.string()}, {"units", std::to_string(skipped)}});
  }
  std::map<LangTag, Corpus> out;
  for (auto& [lang, units] : by_lang) {
    Corpus c(std::move(units));
    c.check_unique_ids();
    out.emplace(lang, std::move(c));
  }
  return out;
}

std::string tree_digest(const fs::path& dir) {
  std::map<std::string, std::string> files;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir.string());
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    files[fs::relative(e.path(), dir).generic_string()] = sha256_hex(read_file(e.path()));
  }
  return digest_of_pairs(files);
}

RunSummary run_pipeline(const PipelineConfig& config, unsigned threads) {
  if (config.output_dir.empty()) throw ValidationError("config.output_dir is required");
  validate_inputs(config);
  const fs::path out_dir = config.resolve(config.output_dir);
  Tree tree(out_dir);
  ordered_json stages = ordered_json::array();

  auto stage = [&](std::string_view name, const std::function<void(ordered_json&)>& body) {
    ordered_json record;
    record["name"] = name;
    log::info("stage.start", {{"stage", std::string(name)}});
    try {
      body(record);
    } catch (...) {
      log::emit(log::Level::kError, "stage.failed", {{"stage", std::string(name)}});
      rethrow_in_stage(name);
    }
    stages.push_back(std::move(record));
  };

  ordered_json input_files = ordered_json::array();
  std::map<LangTag, Corpus> ingested;
  stage("ingest", [&](ordered_json& r) {
    ordered_json ins = ordered_json::object();
    for (const auto& in : config.inputs) {
      const std::string digest = sha256_hex(read_file(config.resolve(in.path)));
      ins[in.path.generic_string()] = digest;
      input_files.push_back({{"path", in.path.generic_string()},
                             {"format", to_string(in.format)},
                             {"source_lang", in.source_lang.code()},
                             {"target_lang", in.target_lang ? in.target_lang->code() : ""},
                             {"domain", to_string(in.domain)},
                             {"sha256", digest}});
    }
    r["inputs"] = ins;
    ingested = ingest_inputs(config);
    if (ingested.empty()) throw ValidationError("no units were ingested");
    ordered_json outs = ordered_json::object();
    for (const auto& [lang, c] : ingested) {
      const std::string rel = "ingested/" + lang.code() + ".jsonl";
      tree.put(rel, corpus_to_jsonl(c));
      outs[rel] = c.size();
    }
    r["outputs"] = outs;
  });

  std::map<LangTag, Corpus> curated;
  stage("curate", [&](ordered_json& r) {
    ordered_json ins = ordered_json::object();
    ordered_json outs = ordered_json::object();
    for (const auto& [lang, c] : ingested) {
      ins[lang.code()] = corpus_digest(c);
      curate::CurationResult res = curate::curate_corpus(c, config.curation);
      const std::string rel = "curated/" + lang.code() + ".jsonl";
      tree.put(rel, corpus_to_jsonl(res.corpus));
      tree.put("curated/" + lang.code() + ".drops.jsonl", drops_to_jsonl(res.drops));
      outs[rel] = {{"kept", res.corpus.size()}, {"dropped", res.drops.size()}};
      curated.emplace(lang, std::move(res.corpus));
    }
    r["inputs"] = ins;
    r["outputs"] = outs;
  });

  partition::AlignResult aligned;
  stage("align", [&](ordered_json& r) {
    ordered_json ins = ordered_json::object();
    for (const auto& [lang, c] : curated) ins[lang.code()] = corpus_digest(c);
    r["inputs"] = ins;
    aligned = partition::interlingual_align(curated);
    tree.put("aligned/aligned.jsonl", corpus_to_jsonl(aligned.aligned.corpus));
    tree.put("aligned/drops.jsonl", drops_to_jsonl(aligned.drops));
    ordered_json langs = ordered_json::array();
    for (const auto& l : aligned.aligned.languages) langs.push_back(l.code());
    r["outputs"] = {{"aligned/aligned.jsonl", aligned.aligned.corpus.size()},
                    {"languages", langs},
                    {"dropped", aligned.drops.size()}};
  });
  const Corpus& aligned_corpus = aligned.aligned.corpus;

  partition::SplitResult parts;
  std::vector<Corpus> subsets;
  stage("split", [&](ordered_json& r) {
    r["inputs"] = {{"aligned", corpus_digest(aligned_corpus)}, {"seed", config.seed}};
    const Corpus shuffled = partition::seeded_shuffle(aligned_corpus, config.seed);
    parts = partition::split(shuffled, config.ratios);
    parts.manifest.seed = config.seed;
    parts.manifest.checksum = corpus_digest(aligned_corpus);
    parts.manifest.prng = std::string(partition::kShuffleId);
    parts.manifest.subset_sizes = config.subset_sizes;
    subsets = partition::nested_subsets(parts.train, config.subset_sizes);
    tree.put("split/train.jsonl", corpus_to_jsonl(parts.train));
    tree.put("split/dev.jsonl", corpus_to_jsonl(parts.dev));
    tree.put("split/test.jsonl", corpus_to_jsonl(parts.test));
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      tree.put("split/train." + std::to_string(config.subset_sizes[i]) + ".jsonl", corpus_to_jsonl(subsets[i]));
    }
    tree.put("split/manifest.json", manifest_to_json(parts.manifest));
    r["outputs"] = {{"train", parts.train.size()}, {"dev", parts.dev.size()}, {"test", parts.test.size()},
                    {"subsets", config.subset_sizes}};
  });

  std::map<LangTag, Corpus> full;
  stage("full-extract", [&](ordered_json& r) {
    r["inputs"] = {{"dev", corpus_digest(parts.dev)}, {"test", corpus_digest(parts.test)}};
    ordered_json outs = ordered_json::object();
    for (const auto& lang : aligned.aligned.languages) {
      Corpus c = partition::full_language_extract(curated, parts.dev, parts.test, lang);
      const std::string rel = "full/" + lang.code() + ".jsonl";
      tree.put(rel, corpus_to_jsonl(c));
      outs[rel] = c.size();
      full.emplace(lang, std::move(c));
    }
    r["outputs"] = outs;
  });

  decontam::DecontamResult dec;
  stage("decontam", [&](ordered_json& r) {
    std::vector<TransUnit> reference = parts.train.units();
    if (config.decontam_against_full) {
      std::set<std::string> ids;
      std::set<std::string> sources;
      for (const auto& u : reference) {
        ids.insert(u.id);
        sources.insert(u.source);
      }
      for (const auto& [lang, c] : full) {
        for (const auto& u : c.units()) {
          if (sources.count(u.source) || !ids.insert(u.id).second) continue;
          sources.insert(u.source);
          reference.push_back(u);
        }
      }
    }
    const Corpus train_side(std::move(reference));
    r["inputs"] = {{"test", corpus_digest(parts.test)}, {"reference", corpus_digest(train_side)}};
    dec = decontam::decontaminate(parts.test, train_side, config.decontam, threads);
    tree.put("decontam/test.jsonl", corpus_to_jsonl(dec.kept));
    std::string verdicts;
    for (const auto& v : dec.verdicts) {
      verdicts += decontam::verdict_to_json_line(v);
      verdicts += '\n';
    }
    tree.put("decontam/verdicts.jsonl", verdicts);
    tree.put("decontam/drops.jsonl", drops_to_jsonl(dec.drops));
    r["outputs"] = {{"kept", dec.kept.size()}, {"dropped", dec.drops.size()}, {"reference_units", train_side.size()}};
  });

  stage("prompts", [&](ordered_json& r) {
    r["inputs"] = {{"train", corpus_digest(parts.train)}, {"dev", corpus_digest(parts.dev)},
                   {"test", corpus_digest(dec.kept)}};
    ordered_json outs = ordered_json::object();
    const LangTag& src_tag = aligned_corpus.empty() ? config.inputs.front().source_lang : aligned_corpus[0].source_lang;
    const std::string src_name = prompt_language_name(config, src_tag);
    using promptkit::PromptKind;
    for (const auto& lang : aligned.aligned.languages) {
      const std::string tgt_name = prompt_language_name(config, lang);
      const std::string dir = "prompts/" + lang.code() + "/";
      auto emit = [&](const std::string& name, const Corpus& c, PromptKind kind) {
        tree.put(dir + name, records_to_jsonl(render_records(c, lang, kind, src_name, tgt_name)));
        outs[dir + name] = c.size();
      };
      emit("train.jsonl", parts.train, PromptKind::kTraining);
      for (std::size_t i = 0; i < subsets.size(); ++i) {
        emit("train." + std::to_string(config.subset_sizes[i]) + ".jsonl", subsets[i], PromptKind::kTraining);
      }
      emit("full.jsonl", full.at(lang), PromptKind::kTraining);
      emit("dev.jsonl", parts.dev, PromptKind::kInference);
      emit("test.jsonl", dec.kept, PromptKind::kInference);
    }
    r["outputs"] = outs;
  });

  stage("configs", [&](ordered_json& r) {
    tree.put("configs/training.json", config.training.to_json());
    tree.put("configs/inference.json", config.inference.to_json());
    r["outputs"] = {"configs/training.json", "configs/inference.json"};
  });

  ordered_json manifest;
  manifest["tool"] = "tmforge";
  manifest["version"] = TMFORGE_VERSION;
  manifest["digest_algorithm"] = kDigestAlgorithm;
  manifest["inputs"] = input_files;
  manifest["seed"] = config.seed;
  manifest["choices"] = {
      {"curation.rule_order", std::string(curate::kRuleOrder)},
      {"curation.word_count", "whitespace"},
      {"curation.max_words", config.curation.max_words},
      {"align.key", "whitespace-normalized source"},
      {"shuffle.prng", std::string(partition::kShuffleId)},
      {"split.rule", "dev=ceil(dev*N),test=ceil(test*N),train=rest"},
      {"decontam.threshold", config.decontam.threshold},
      {"decontam.ngram_order", config.decontam.ngram_order},
      {"decontam.combine", std::string(decontam::to_string(config.decontam.combine))},
      {"decontam.similarity", "lev=1-d/max(len) over code points; ngram=jaccard of word n-grams"},
      {"decontam.compared_side", "source"},
      {"decontam.against", config.decontam_against_full ? "train+full" : "train"},
      {"prompt.template", "llama3-chat/json-translation"},
      {"metrics.bleu", metrics::bleu_signature(config.metrics.bleu)},
      {"metrics.chrf", metrics::chrf_signature(config.metrics.chrf)},
      {"metrics.ter", metrics::ter_signature(config.metrics.ter)},
  };
  manifest["stages"] = stages;
  ordered_json artifacts = ordered_json::object();
  for (const auto& [rel, digest] : tree.files()) artifacts[rel] = digest;
  manifest["artifacts"] = artifacts;
  tree.put("manifest.json", manifest.dump(2) + "\n");

  RunSummary summary;
  summary.artifacts.assign(tree.files().begin(), tree.files().end());
  summary.tree_digest = digest_of_pairs(tree.files());
  summary.split_counts = parts.manifest.counts;
  summary.test_kept = dec.kept.size();
  log::info("pipeline.done", {{"artifacts", std::to_string(summary.artifacts.size())},
                              {"tree_digest", summary.tree_digest}});
  return summary;
}

}  // namespace tmforge::pipeline
