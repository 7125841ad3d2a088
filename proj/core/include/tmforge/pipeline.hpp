#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tmforge/corpus.hpp"
#include "tmforge/curate.hpp"
#include "tmforge/decontam.hpp"
#include "tmforge/metrics.hpp"
#include "tmforge/promptkit.hpp"

namespace tmforge::pipeline {

enum class InputFormat { kTsv, kTmx, kJsonl };

InputFormat parse_input_format(std::string_view s);
std::string_view to_string(InputFormat f);

struct InputSpec {
  std::filesystem::path path;  // as written in the config
  InputFormat format = InputFormat::kTsv;
  LangTag source_lang;
  std::optional<LangTag> target_lang;  // required for tsv; filters tmx/jsonl
  Domain domain = Domain::kOther;
};

struct PipelineConfig {
  std::vector<InputSpec> inputs;
  curate::CurationConfig curation;
  std::uint64_t seed = 0;
  SplitRatios ratios;
  std::vector<std::size_t> subset_sizes;
  decontam::DecontamConfig decontam;
  /// Compare test sources against the full per-language extracts as well as the aligned train split.
  bool decontam_against_full = true;
  std::map<LangTag, std::string> language_names;
  metrics::MetricConfig metrics;
  promptkit::TrainConfigArtifact training;
  promptkit::InferConfigArtifact inference;
  std::filesystem::path output_dir;
  /// Directory relative paths are resolved against (the config file's directory).
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Parses the JSON config. The seed is mandatory. Throws ValidationError.
PipelineConfig parse_config(std::string_view json, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

/// Checks that every input exists; throws IoError naming the first missing one.
void validate_inputs(const PipelineConfig& config);

// Section parsers shared with the command-line subcommands.
curate::CurationConfig parse_curation(std::string_view json);
decontam::DecontamConfig parse_decontam(std::string_view json);
metrics::MetricConfig parse_metrics(std::string_view json);

/// Name used in prompts: the config override if present, else the built-in table.
std::string prompt_language_name(const PipelineConfig& config, const LangTag& tag);

struct RunSummary {
  /// Relative path -> SHA-256 of every file written, sorted by path.
  std::vector<std::pair<std::string, std::string>> artifacts;
  std::string tree_digest;
  SplitCounts split_counts;
  std::size_t test_kept = 0;
};

/// ingest, curate, align, shuffle, split, subsets, full extracts,
/// decontam, prompts, configs, manifest. A failing stage raises an error of
/// the original kind whose message starts with "stage <name>:".
RunSummary run_pipeline(const PipelineConfig& config, unsigned threads = 0);

/// SHA-256 over sorted (relative path, file SHA-256) pairs of a directory tree.
std::string tree_digest(const std::filesystem::path& dir);

/// Per-language corpora of single-target units read from the inputs.
std::map<LangTag, Corpus> ingest_inputs(const PipelineConfig& config);

}  // namespace tmforge::pipeline
