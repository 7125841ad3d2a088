#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tmforge/corpus.hpp"
#include "tmforge/error.hpp"

namespace tmforge::promptkit {

inline constexpr std::string_view kBeginOfText = "<|begin_of_text|>";
inline constexpr std::string_view kStartHeader = "<|start_header_id|>";
inline constexpr std::string_view kEndHeader = "<|end_header_id|>";
inline constexpr std::string_view kEndOfTurn = "<|eot_id|>";
inline constexpr std::string_view kEndOfText = "<|end_of_text|>";
inline constexpr std::string_view kStopMarker = "}assistant";

enum class PromptKind { kInference, kTraining };

std::string_view to_string(PromptKind k);

struct PromptRecord {
  std::string unit_id;
  PromptKind kind = PromptKind::kInference;
  std::string rendered;
  std::string source_lang_name;
  std::string target_lang_name;

  bool operator==(const PromptRecord&) const = default;
};

/// English exonym for a tag ("pt-BR" -> "Brazilian Portuguese"). An exact
/// match wins, then the primary subtag. Throws ValidationError if unknown.
std::string language_name(const LangTag& tag);

/// Inference prompt; the sentence is spliced verbatim. Throws ValidationError
/// on an empty sentence.
std::string render_inference_prompt(std::string_view source_lang_name, std::string_view target_lang_name,
                                    std::string_view sentence);

/// The assistant payload for a target: {"translation": "<escaped>"}.
std::string render_payload(std::string_view target);

/// Inference prompt + payload + end-of-text token.
std::string render_training_example(std::string_view source_lang_name, std::string_view target_lang_name,
                                    std::string_view sentence, std::string_view target);

/// Raised when raw output holds no translation payload; carries the output.
class ExtractionError : public ValidationError {
 public:
  ExtractionError(const std::string& what, std::string raw) : ValidationError(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

/// Tag removal (tags become spaces), newline replacement, whitespace collapse.
std::string postprocess(std::string_view text);

/// Stop-marker truncation, JSON payload extraction (strict, then literal
/// prefix/suffix fallback), then postprocess. Invalid UTF-8 bytes become
/// U+FFFD. Throws ExtractionError when no payload is found.
std::string extract_translation(std::string_view raw_model_output);

struct TrainConfigArtifact {
  bool load_in_4bit = true;
  std::string quant_type = "nf4";
  bool double_quant = true;
  std::string compute_dtype = "bfloat16";
  int lora_r = 64;
  int lora_alpha = 16;
  double lora_dropout = 0.1;
  std::string lora_bias = "none";
  int batch_size = 32;
  double learning_rate = 2e-3;
  std::string scheduler = "constant";
  bool bf16 = true;
  /// Dotted key -> value text for every explicitly overridden field.
  std::map<std::string, std::string> overrides;

  /// Sets a field by dotted key (e.g. "training.learning_rate") and records
  /// the override. Throws ValidationError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  std::string to_json() const;
};

struct InferConfigArtifact {
  int sampling_topk = 1;
  int max_batch_size = 8096;
  int min_length = 1;
  std::string max_length = "2*source_length";
  std::map<std::string, std::string> overrides;

  void set(std::string_view key, std::string_view value);
  std::string to_json() const;
};

void emit_training_config(const std::filesystem::path& path, const TrainConfigArtifact& config = {});
void emit_inference_config(const std::filesystem::path& path, const InferConfigArtifact& config = {});

/// One record per unit for the given target language, in corpus order.
std::vector<PromptRecord> render_batch(const Corpus& corpus, const LangTag& target, PromptKind kind);

/// {"id", "prompt"} for inference records, {"id", "text"} for training ones.
std::string record_to_json_line(const PromptRecord& record);
void write_records(const std::filesystem::path& path, const std::vector<PromptRecord>& records);

}  // namespace tmforge::promptkit
