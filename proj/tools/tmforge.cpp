#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tmforge/corpus.hpp"
#include "tmforge/curate.hpp"
#include "tmforge/decontam.hpp"
#include "tmforge/error.hpp"
#include "tmforge/ingest.hpp"
#include "tmforge/log.hpp"
#include "tmforge/metrics.hpp"
#include "tmforge/partition.hpp"
#include "tmforge/pipeline.hpp"
#include "tmforge/promptkit.hpp"
#include "tmforge/report.hpp"

#ifndef TMFORGE_VERSION
#define TMFORGE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace tmforge;

namespace {

struct Globals {
  unsigned threads = 0;
  std::string config;
  std::string log_level = "info";
};

// A section of the --config document, serialized back to text, or nullopt.
std::optional<std::string> config_section(const Globals& g, const std::string& key) {
  if (g.config.empty()) return std::nullopt;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(g.config));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(g.config + ": " + e.what(), e.byte);
  }
  if (!j.is_object()) throw ValidationError(g.config + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  return it->dump();
}

std::optional<LangTag> optional_tag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return LangTag::parse(s);
}

SplitRatios parse_ratios(const std::string& s) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const std::size_t comma = std::min(s.find(',', pos), s.size());
    const std::string part = s.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw UsageError("--ratios: cannot parse \"" + part + "\"");
    }
    pos = comma + 1;
  }
  if (v.size() != 3) throw UsageError("--ratios expects three comma-separated numbers");
  return SplitRatios{v[0], v[1], v[2]};
}

void set_key_values(const std::vector<std::string>& pairs, const std::function<void(std::string_view, std::string_view)>& set) {
  for (const auto& kv : pairs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("expected key=value, got \"" + kv + "\"");
    set(std::string_view(kv).substr(0, eq), std::string_view(kv).substr(eq + 1));
  }
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

void add_ingest(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("ingest", "Parse TSV/TMX exports into canonical JSON-lines corpora");
  auto input = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("tsv");
  auto src = std::make_shared<std::string>();
  auto tgt = std::make_shared<std::string>();
  auto domain = std::make_shared<std::string>("other");
  auto out = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "Input file (without --config)");
  cmd->add_option("--format", *format, "tsv, tmx or jsonl")->capture_default_str();
  cmd->add_option("--source-lang", *src, "Source language tag");
  cmd->add_option("--target-lang", *tgt, "Target language tag (tsv) or filter (tmx)");
  cmd->add_option("--domain", *domain, "knowledge-base, mobile-ui, mobile-reference or other")->capture_default_str();
  cmd->add_option("--out", *out, "Output corpus (single input)");
  cmd->add_option("--out-dir", *out_dir, "Output directory, one <lang>.jsonl per target language");
  cmd->callback([=, &g] {
    pipeline::PipelineConfig cfg;
    if (!input->empty()) {
      if (src->empty()) throw UsageError("ingest: --source-lang is required with --input");
      pipeline::InputSpec spec;
      spec.path = *input;
      spec.format = pipeline::parse_input_format(*format);
      spec.source_lang = LangTag::parse(*src);
      spec.target_lang = optional_tag(*tgt);
      spec.domain = parse_domain(*domain);
      if (spec.format == pipeline::InputFormat::kTsv && !spec.target_lang) {
        throw UsageError("ingest: --target-lang is required for tsv input");
      }
      cfg.inputs.push_back(spec);
    } else if (!g.config.empty()) {
      cfg = pipeline::load_config(g.config);
    } else {
      throw UsageError("ingest: pass --input or --config");
    }
    pipeline::validate_inputs(cfg);
    const auto corpora = pipeline::ingest_inputs(cfg);
    if (!out->empty()) {
      if (corpora.size() != 1) throw UsageError("ingest: input has several target languages, use --out-dir");
      write_corpus(*out, corpora.begin()->second);
    } else if (!out_dir->empty()) {
      for (const auto& [lang, c] : corpora) write_corpus(fs::path(*out_dir) / (lang.code() + ".jsonl"), c);
    } else {
      throw UsageError("ingest: pass --out or --out-dir");
    }
    for (const auto& [lang, c] : corpora) log::info("ingest.done", {{"lang", lang.code()}, {"units", std::to_string(c.size())}});
  });
}

void add_curate(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("curate", "Apply the curation rules to a corpus");
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto drop_log = std::make_shared<std::string>();
  auto max_words = std::make_shared<std::size_t>(0);
  auto keep_dups = std::make_shared<bool>(false);
  auto keep_copies = std::make_shared<bool>(false);
  auto keep_noncontent = std::make_shared<bool>(false);
  cmd->add_option("--in", *in, "Input corpus")->required();
  cmd->add_option("--out", *out, "Curated corpus")->required();
  cmd->add_option("--drop-log", *drop_log, "Drop log (JSON lines)");
  cmd->add_option("--max-words", *max_words, "Word limit per side");
  cmd->add_flag("--keep-duplicates", *keep_dups, "Do not drop duplicates");
  cmd->add_flag("--keep-source-copies", *keep_copies, "Do not drop untranslated copies");
  cmd->add_flag("--keep-noncontent", *keep_noncontent, "Do not drop non-content segments");
  cmd->callback([=, &g] {
    curate::CurationConfig cfg;
    if (auto s = config_section(g, "curation")) cfg = pipeline::parse_curation(*s);
    if (*max_words) cfg.max_words = *max_words;
    if (*keep_dups) cfg.drop_duplicates = false;
    if (*keep_copies) cfg.drop_source_copies = false;
    if (*keep_noncontent) cfg.drop_noncontent = false;
    cfg.validate();
    const auto res = curate::curate_corpus(read_corpus(*in), cfg);
    write_corpus(*out, res.corpus);
    if (!drop_log->empty()) write_drop_log(*drop_log, res.drops);
    log::info("curate.done", {{"kept", std::to_string(res.corpus.size())}, {"dropped", std::to_string(res.drops.size())}});
  });
}

void add_align(CLI::App& app, Globals&) {
  auto* cmd = app.add_subcommand("align", "Join per-language corpora on identical source text");
  auto ins = std::make_shared<std::vector<std::string>>();
  auto out = std::make_shared<std::string>();
  auto drop_log = std::make_shared<std::string>();
  cmd->add_option("--in", *ins, "Per-language corpus (repeat once per language)")->required();
  cmd->add_option("--out", *out, "Aligned corpus")->required();
  cmd->add_option("--drop-log", *drop_log, "Drop log (JSON lines)");
  cmd->callback([=] {
    std::map<LangTag, Corpus> corpora;
    for (const auto& path : *ins) {
      Corpus c = read_corpus(path);
      if (c.languages().size() != 1) throw ValidationError(path + ": expected exactly one target language");
      const LangTag lang = *c.languages().begin();
      if (!corpora.emplace(lang, std::move(c)).second) throw ValidationError("two inputs for " + lang.code());
    }
    const auto res = partition::interlingual_align(corpora);
    write_corpus(*out, res.aligned.corpus);
    if (!drop_log->empty()) write_drop_log(*drop_log, res.drops);
    log::info("align.done", {{"units", std::to_string(res.aligned.corpus.size())}, {"dropped", std::to_string(res.drops.size())}});
  });
}

void add_split(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("split", "Seeded shuffle, train/dev/test split and nested subsets");
  auto in = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto seed = std::make_shared<std::optional<std::uint64_t>>();
  auto ratios = std::make_shared<std::string>();
  auto subsets = std::make_shared<std::vector<std::size_t>>();
  cmd->add_option("--in", *in, "Aligned corpus")->required();
  cmd->add_option("--out-dir", *out_dir, "Output directory")->required();
  cmd->add_option("--seed", *seed, "Shuffle seed (u64)");
  cmd->add_option("--ratios", *ratios, "train,dev,test (default 0.8,0.1,0.1)");
  cmd->add_option("--subsets", *subsets, "Nested train subset sizes")->delimiter(',');
  cmd->callback([=, &g] {
    std::optional<std::uint64_t> s = *seed;
    SplitRatios r;
    std::vector<std::size_t> sizes = *subsets;
    if (auto sec = config_section(g, "split")) {
      const auto j = nlohmann::json::parse(*sec);
      if (!s && j.contains("seed") && j["seed"].is_number_unsigned()) s = j["seed"].get<std::uint64_t>();
      if (j.contains("ratios") && j["ratios"].is_array() && j["ratios"].size() == 3) {
        r = SplitRatios{j["ratios"][0].get<double>(), j["ratios"][1].get<double>(), j["ratios"][2].get<double>()};
      }
      if (sizes.empty() && j.contains("subset_sizes")) sizes = j["subset_sizes"].get<std::vector<std::size_t>>();
    }
    if (!s) throw UsageError("split: a seed is required (--seed or split.seed in --config)");
    if (!ratios->empty()) r = parse_ratios(*ratios);
    const Corpus input = read_corpus(*in);
    auto res = partition::split(partition::seeded_shuffle(input, *s), r);
    res.manifest.seed = *s;
    res.manifest.checksum = corpus_digest(input);
    res.manifest.prng = std::string(partition::kShuffleId);
    res.manifest.subset_sizes = sizes;
    const auto subs = partition::nested_subsets(res.train, sizes);
    const fs::path dir = *out_dir;
    write_corpus(dir / "train.jsonl", res.train);
    write_corpus(dir / "dev.jsonl", res.dev);
    write_corpus(dir / "test.jsonl", res.test);
    for (std::size_t i = 0; i < subs.size(); ++i) write_corpus(dir / ("train." + std::to_string(sizes[i]) + ".jsonl"), subs[i]);
    write_manifest(dir / "manifest.json", res.manifest);
    log::info("split.done", {{"train", std::to_string(res.train.size())},
                             {"dev", std::to_string(res.dev.size())},
                             {"test", std::to_string(res.test.size())}});
  });
}

void add_decontam(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("decontam", "Drop test units too similar to any training unit");
  auto test = std::make_shared<std::string>();
  auto train = std::make_shared<std::vector<std::string>>();
  auto out = std::make_shared<std::string>();
  auto report = std::make_shared<std::string>();
  auto drop_log = std::make_shared<std::string>();
  auto threshold = std::make_shared<std::optional<double>>();
  auto ngram = std::make_shared<std::optional<std::size_t>>();
  auto combine = std::make_shared<std::string>();
  cmd->add_option("--test", *test, "Test corpus")->required();
  cmd->add_option("--train", *train, "Training corpus (repeatable)")->required();
  cmd->add_option("--out", *out, "Kept test units");
  cmd->add_option("--report", *report, "Verdicts (JSON lines)");
  cmd->add_option("--drop-log", *drop_log, "Drop log (JSON lines)");
  cmd->add_option("--threshold", *threshold, "Drop when combined similarity exceeds this");
  cmd->add_option("--ngram", *ngram, "Word n-gram order");
  cmd->add_option("--combine", *combine, "max or mean");
  cmd->callback([=, &g] {
    decontam::DecontamConfig cfg;
    if (auto s = config_section(g, "decontam")) cfg = pipeline::parse_decontam(*s);
    if (*threshold) cfg.threshold = **threshold;
    if (*ngram) cfg.ngram_order = **ngram;
    if (!combine->empty()) cfg.combine = decontam::parse_combine(*combine);
    cfg.validate();
    std::vector<TransUnit> units;
    for (const auto& path : *train) {
      const Corpus c = read_corpus(path);
      units.insert(units.end(), c.units().begin(), c.units().end());
    }
    const auto res = decontam::decontaminate(read_corpus(*test), Corpus(std::move(units)), cfg, g.threads);
    if (!out->empty()) write_corpus(*out, res.kept);
    if (!report->empty()) decontam::write_verdicts(*report, res.verdicts);
    if (!drop_log->empty()) write_drop_log(*drop_log, res.drops);
    log::info("decontam.done", {{"kept", std::to_string(res.kept.size())}, {"dropped", std::to_string(res.drops.size())}});
  });
}

void add_prompts(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("prompts", "Render inference prompts or training examples");
  auto in = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  auto tgt = std::make_shared<std::string>();
  auto kind = std::make_shared<std::string>("inference");
  auto src_name = std::make_shared<std::string>();
  auto tgt_name = std::make_shared<std::string>();
  cmd->add_option("--in", *in, "Corpus")->required();
  cmd->add_option("--out", *out, "Records (JSON lines)")->required();
  cmd->add_option("--target-lang", *tgt, "Target language tag")->required();
  cmd->add_option("--kind", *kind, "inference or training")->capture_default_str();
  cmd->add_option("--source-name", *src_name, "Override the source language name");
  cmd->add_option("--target-name", *tgt_name, "Override the target language name");
  cmd->callback([=, &g] {
    std::map<LangTag, std::string> names;
    if (auto s = config_section(g, "prompts")) {
      const auto j = nlohmann::json::parse(*s);
      if (j.contains("language_names")) {
        for (const auto& [k, v] : j["language_names"].items()) names[LangTag::parse(k)] = v.get<std::string>();
      }
    }
    auto name_of = [&names](const LangTag& t) {
      auto it = names.find(t);
      return it != names.end() ? it->second : promptkit::language_name(t);
    };
    promptkit::PromptKind k;
    if (*kind == "inference") k = promptkit::PromptKind::kInference;
    else if (*kind == "training") k = promptkit::PromptKind::kTraining;
    else throw UsageError("prompts: --kind must be inference or training");
    const LangTag target = LangTag::parse(*tgt);
    const Corpus corpus = read_corpus(*in);
    std::vector<promptkit::PromptRecord> records;
    for (const auto& u : corpus.units()) {
      const std::string* t = u.target(target);
      if (!t) throw ValidationError("unit " + u.id + " has no " + target.code() + " target");
      promptkit::PromptRecord r;
      r.unit_id = u.id;
      r.kind = k;
      r.source_lang_name = src_name->empty() ? name_of(u.source_lang) : *src_name;
      r.target_lang_name = tgt_name->empty() ? name_of(target) : *tgt_name;
      r.rendered = k == promptkit::PromptKind::kInference
                       ? promptkit::render_inference_prompt(r.source_lang_name, r.target_lang_name, u.source)
                       : promptkit::render_training_example(r.source_lang_name, r.target_lang_name, u.source, *t);
      records.push_back(std::move(r));
    }
    promptkit::write_records(*out, records);
    log::info("prompts.done", {{"records", std::to_string(records.size())}});
  });
}

void add_configs(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("configs", "Emit the training and inference config artifacts");
  auto out_dir = std::make_shared<std::string>();
  auto train_set = std::make_shared<std::vector<std::string>>();
  auto infer_set = std::make_shared<std::vector<std::string>>();
  cmd->add_option("--out-dir", *out_dir, "Output directory")->required();
  cmd->add_option("--set", *train_set, "Training override key=value (e.g. lora.r=32)");
  cmd->add_option("--infer-set", *infer_set, "Inference override key=value");
  cmd->callback([=, &g] {
    promptkit::TrainConfigArtifact train;
    promptkit::InferConfigArtifact infer;
    for (const auto& [section, target] : {std::pair{"training", 0}, std::pair{"inference", 1}}) {
      if (auto s = config_section(g, section)) {
        for (const auto& [k, v] : nlohmann::json::parse(*s).items()) {
          const std::string value = v.is_string() ? v.get<std::string>() : v.dump();
          if (target == 0) train.set(k, value);
          else infer.set(k, value);
        }
      }
    }
    set_key_values(*train_set, [&](std::string_view k, std::string_view v) { train.set(k, v); });
    set_key_values(*infer_set, [&](std::string_view k, std::string_view v) { infer.set(k, v); });
    promptkit::emit_training_config(fs::path(*out_dir) / "training.json", train);
    promptkit::emit_inference_config(fs::path(*out_dir) / "inference.json", infer);
    log::info("configs.done", {{"dir", *out_dir}});
  });
}

void add_score(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("score", "Corpus-level BLEU, chrF++ and TER");
  auto hyp = std::make_shared<std::string>();
  auto ref = std::make_shared<std::string>();
  auto lang = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--hyp", *hyp, "Hypotheses (JSON lines)")->required();
  cmd->add_option("--ref", *ref, "References (JSON lines)")->required();
  cmd->add_option("--lang", *lang, "Target language of corpus-unit lines");
  cmd->add_option("--out", *out, "Report (JSON)");
  cmd->callback([=, &g] {
    metrics::MetricConfig cfg;
    if (auto s = config_section(g, "metrics")) cfg = pipeline::parse_metrics(*s);
    const auto reports = metrics::score_run(*hyp, *ref, cfg, optional_tag(*lang), g.threads);
    if (!out->empty()) write_file(*out, metrics::reports_to_json(reports));
    for (const auto& r : reports) std::cout << r.name << ' ' << fixed2(r.score) << '\n';
  });
}

void add_report(CLI::App& app, Globals&) {
  auto* cmd = app.add_subcommand("report", "Render a results table and deltas against the baseline");
  auto table = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("markdown");
  auto out = std::make_shared<std::string>();
  auto summary = std::make_shared<std::vector<std::string>>();
  cmd->add_option("--table", *table, "Results table (CSV or JSON)")->required();
  cmd->add_option("--format", *format, "markdown or csv")->capture_default_str();
  cmd->add_option("--out", *out, "Rendered report");
  cmd->add_option("--summary", *summary, "Size labels to summarize against baseline")->delimiter(',');
  cmd->callback([=] {
    const auto t = report::load_run_table(*table);
    std::vector<report::DeltaSummary> sums;
    for (const auto& label : *summary) sums.push_back(report::delta_summary(t, report::parse_size_label(label)));
    if (!out->empty()) write_file(*out, report::render(t, sums, report::parse_format(*format)));
    for (const auto& s : sums) {
      std::cout << to_string(s.size) << " vs baseline\n";
      for (auto m : report::kMetrics) {
        const auto d = s.get(m);
        if (!d) continue;
        const std::string name = m == report::Metric::kChrf ? "chrF++" : m == report::Metric::kBleu ? "BLEU"
                                 : m == report::Metric::kTer ? "TER" : "COMET";
        std::cout << "  " << name << (m == report::Metric::kTer ? " decrease " : " delta ") << fixed2(d->absolute)
                  << ", relative " << fixed2(d->relative_percent) << "% over " << d->languages << " languages\n";
      }
    }
  });
}

void add_run(CLI::App& app, Globals& g) {
  auto* cmd = app.add_subcommand("run", "Run the whole pipeline from a config file");
  auto out_dir = std::make_shared<std::string>();
  cmd->add_option("--out-dir", *out_dir, "Override output_dir from the config");
  cmd->callback([=, &g] {
    if (g.config.empty()) throw UsageError("run: --config is required");
    auto cfg = pipeline::load_config(g.config);
    if (!out_dir->empty()) cfg.output_dir = fs::absolute(*out_dir);
    const auto summary = pipeline::run_pipeline(cfg, g.threads);
    log::info("run.done", {{"tree_digest", summary.tree_digest}});
  });
}

std::string version_text() {
  const metrics::MetricConfig m;
  std::string s = "tmforge " TMFORGE_VERSION "\n";
  s += "BLEU   " + metrics::bleu_signature(m.bleu) + "\n";
  s += "chrF++ " + metrics::chrf_signature(m.chrf) + "\n";
  s += "TER    " + metrics::ter_signature(m.ter) + "\n";
  s += "prng   " + std::string(partition::kShuffleId);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translation-memory to fine-tuning dataset toolkit", "tmforge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", version_text());
  Globals g;
  app.add_option("--config", g.config, "Pipeline config (JSON)");
  app.add_option("--threads", g.threads, "Worker thread cap (0 = all cores)");
  app.add_option("--log-level", g.log_level, "debug, info, warn or error")
      ->capture_default_str()
      ->check(CLI::IsMember({"debug", "info", "warn", "error"}))
      ->each([](const std::string& level) {
        if (level == "debug") log::set_min_level(log::Level::kDebug);
        else if (level == "warn") log::set_min_level(log::Level::kWarn);
        else if (level == "error") log::set_min_level(log::Level::kError);
        else log::set_min_level(log::Level::kInfo);
      });
  app.fallthrough();
  add_ingest(app, g);
  add_curate(app, g);
  add_align(app, g);
  add_split(app, g);
  add_decontam(app, g);
  add_prompts(app, g);
  add_configs(app, g);
  add_score(app, g);
  add_report(app, g);
  add_run(app, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::kUsage);
  } catch (const Error& e) {
    log::emit(log::Level::kError, "error", {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}});
    return e.exit_code();
  } catch (const std::exception& e) {
    log::emit(log::Level::kError, "error", {{"kind", "internal"}, {"message", e.what()}});
    return static_cast<int>(ErrorKind::kInternal);
  }
  return 0;
}
