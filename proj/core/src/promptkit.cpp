#include "tmforge/promptkit.hpp"

#include <array>
#include <charconv>
#include <optional>

#include <nlohmann/json.hpp>

#include "tmforge/ingest.hpp"
#include "tmforge/text.hpp"

namespace tmforge::promptkit {

std::string_view to_string(PromptKind k) { return k == PromptKind::kInference ? "inference" : "training"; }

namespace {

struct NameEntry {
  std::string_view code;
  std::string_view name;
};

constexpr std::array<NameEntry, 24> kNames = {{
    {"pt-BR", "Brazilian Portuguese"},
    {"pt-PT", "European Portuguese"},
    {"zh-TW", "Traditional Chinese"},
    {"zh-CN", "Simplified Chinese"},
    {"en", "English"},
    {"pt", "Portuguese"},
    {"cs", "Czech"},
    {"de", "German"},
    {"fi", "Finnish"},
    {"ko", "Korean"},
    {"fr", "French"},
    {"es", "Spanish"},
    {"it", "Italian"},
    {"ja", "Japanese"},
    {"zh", "Chinese"},
    {"nl", "Dutch"},
    {"pl", "Polish"},
    {"sv", "Swedish"},
    {"da", "Danish"},
    {"nb", "Norwegian"},
    {"ru", "Russian"},
    {"tr", "Turkish"},
    {"ar", "Arabic"},
    {"hu", "Hungarian"},
}};

std::string sanitize_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  while (!s.empty()) {
    const std::size_t bad = text::find_invalid_utf8(s);
    if (bad == std::string_view::npos) {
      out.append(s);
      break;
    }
    out.append(s.substr(0, bad));
    out.append("\xEF\xBF\xBD");
    s.remove_prefix(bad + 1);
  }
  return out;
}

// End of the balanced object starting at `open`, honouring JSON strings; npos if unbalanced.
std::size_t object_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{') ++depth;
    else if (c == '}' && --depth == 0) return i;
  }
  return std::string_view::npos;
}

std::optional<std::string> strict_payload(std::string_view s) {
  for (std::size_t open = s.find('{'); open != std::string_view::npos; open = s.find('{', open + 1)) {
    const std::size_t close = object_end(s, open);
    if (close == std::string_view::npos) continue;
    const auto j = nlohmann::json::parse(s.substr(open, close - open + 1), nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    const auto it = j.find("translation");
    if (it != j.end() && it->is_string()) return it->get<std::string>();
  }
  return std::nullopt;
}

// Best-effort JSON string unescape for truncated payloads.
std::string lenient_unescape(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    const char e = s[++i];
    switch (e) {
      case 'n': out.push_back('\n'); break;
      case 't': out.push_back('\t'); break;
      case 'r': out.push_back('\r'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      case 'u': {
        unsigned cp = 0;
        if (i + 4 < s.size()) {
          const auto r = std::from_chars(s.data() + i + 1, s.data() + i + 5, cp, 16);
          if (r.ec == std::errc() && r.ptr == s.data() + i + 5 && !(cp >= 0xD800 && cp <= 0xDFFF)) {
            text::append_utf8(out, static_cast<char32_t>(cp));
            i += 4;
            break;
          }
        }
        out.append("\\u");
        break;
      }
      default: out.push_back(e); break;
    }
  }
  return out;
}

std::size_t skip_space(std::string_view s, std::size_t i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\n' || s[i] == '\r')) ++i;
  return i;
}

// End of a `{ "translation" : "` opener starting at `open`, or npos.
std::size_t opener_end(std::string_view s, std::size_t open) {
  constexpr std::string_view kKey = "\"translation\"";
  std::size_t i = skip_space(s, open + 1);
  if (s.substr(i, kKey.size()) != kKey) return std::string_view::npos;
  i = skip_space(s, i + kKey.size());
  if (i >= s.size() || s[i] != ':') return std::string_view::npos;
  i = skip_space(s, i + 1);
  if (i >= s.size() || s[i] != '"') return std::string_view::npos;
  return i + 1;
}

std::optional<std::string> fallback_payload(std::string_view s) {
  for (std::size_t open = s.find('{'); open != std::string_view::npos; open = s.find('{', open + 1)) {
    const std::size_t start = opener_end(s, open);
    if (start == std::string_view::npos) continue;
    std::string_view body = text::rstrip(s.substr(start));
    if (text::ends_with(body, "\"}")) body.remove_suffix(2);
    else if (text::ends_with(body, "}")) body.remove_suffix(1);
    else if (text::ends_with(body, "\"")) body.remove_suffix(1);
    return lenient_unescape(body);
  }
  return std::nullopt;
}

}  // namespace

std::string language_name(const LangTag& tag) {
  for (const auto& e : kNames) {
    if (e.code == tag.code()) return std::string(e.name);
  }
  for (const auto& e : kNames) {
    if (e.code == tag.primary()) return std::string(e.name);
  }
  throw ValidationError("no language name for tag " + tag.code());
}

std::string render_inference_prompt(std::string_view source_lang_name, std::string_view target_lang_name,
                                    std::string_view sentence) {
  if (sentence.empty()) throw ValidationError("sentence must be non-empty");
  std::string out;
  out.reserve(320 + sentence.size());
  out.append(kBeginOfText);
  out.append(kStartHeader).append("system").append(kEndHeader).append("\n\n");
  out.append("You are a helpful AI assistant for translation from ");
  out.append(source_lang_name).append(" to ").append(target_lang_name);
  out.append(". You MUST answer with the following JSON scheme: {\"translation\": \"string\"}");
  out.append(kEndOfTurn);
  out.append(kStartHeader).append("user").append(kEndHeader).append("\n\n");
  out.append(sentence);
  out.append(kEndOfTurn);
  out.append(kStartHeader).append("assistant").append(kEndHeader);
  return out;
}

std::string render_payload(std::string_view target) {
  return "{\"translation\": " + nlohmann::json(std::string(target)).dump() + "}";
}

std::string render_training_example(std::string_view source_lang_name, std::string_view target_lang_name,
                                    std::string_view sentence, std::string_view target) {
  if (target.empty()) throw ValidationError("target must be non-empty");
  std::string out = render_inference_prompt(source_lang_name, target_lang_name, sentence);
  out += render_payload(target);
  out.append(kEndOfText);
  return out;
}

std::string postprocess(std::string_view text) {
  std::string s = ingest::strip_html(text, " ");
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return ingest::normalize_whitespace(s);
}

std::string extract_translation(std::string_view raw_model_output) {
  const std::string raw = sanitize_utf8(raw_model_output);
  std::string_view s = raw;
  if (const std::size_t stop = s.find(kStopMarker); stop != std::string_view::npos) s = s.substr(0, stop + 1);
  std::optional<std::string> payload = strict_payload(s);
  if (!payload) payload = fallback_payload(s);
  if (!payload) throw ExtractionError("no translation payload in model output", std::string(raw_model_output));
  return postprocess(*payload);
}

// --- config artifacts -----------------------------------------------------------

namespace {

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError(std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

int parse_int(std::string_view key, std::string_view v) {
  int out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ValidationError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(std::string(v), &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ValidationError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
}

}  // namespace

void TrainConfigArtifact::set(std::string_view key, std::string_view value) {
  if (key == "quantization.load_in_4bit") load_in_4bit = parse_bool(key, value);
  else if (key == "quantization.bnb_4bit_quant_type") quant_type = value;
  else if (key == "quantization.bnb_4bit_use_double_quant") double_quant = parse_bool(key, value);
  else if (key == "quantization.bnb_4bit_compute_dtype") compute_dtype = value;
  else if (key == "lora.r") lora_r = parse_int(key, value);
  else if (key == "lora.lora_alpha") lora_alpha = parse_int(key, value);
  else if (key == "lora.lora_dropout") lora_dropout = parse_double(key, value);
  else if (key == "lora.bias") lora_bias = value;
  else if (key == "training.per_device_train_batch_size") batch_size = parse_int(key, value);
  else if (key == "training.learning_rate") learning_rate = parse_double(key, value);
  else if (key == "training.lr_scheduler_type") scheduler = value;
  else if (key == "training.bf16") bf16 = parse_bool(key, value);
  else throw ValidationError("unknown training config key '" + std::string(key) + "'");
  overrides[std::string(key)] = std::string(value);
}

std::string TrainConfigArtifact::to_json() const {
  nlohmann::ordered_json j;
  j["quantization"] = {{"load_in_4bit", load_in_4bit},
                       {"bnb_4bit_quant_type", quant_type},
                       {"bnb_4bit_use_double_quant", double_quant},
                       {"bnb_4bit_compute_dtype", compute_dtype}};
  j["lora"] = {{"r", lora_r}, {"lora_alpha", lora_alpha}, {"lora_dropout", lora_dropout}, {"bias", lora_bias}};
  j["training"] = {{"per_device_train_batch_size", batch_size},
                   {"learning_rate", learning_rate},
                   {"lr_scheduler_type", scheduler},
                   {"bf16", bf16}};
  j["overrides"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : overrides) j["overrides"][k] = v;
  return j.dump(2) + "\n";
}

void InferConfigArtifact::set(std::string_view key, std::string_view value) {
  if (key == "sampling_topk") sampling_topk = parse_int(key, value);
  else if (key == "max_batch_size") max_batch_size = parse_int(key, value);
  else if (key == "min_length") min_length = parse_int(key, value);
  else if (key == "max_length") max_length = value;
  else throw ValidationError("unknown inference config key '" + std::string(key) + "'");
  overrides[std::string(key)] = std::string(value);
}

std::string InferConfigArtifact::to_json() const {
  nlohmann::ordered_json j;
  j["sampling_topk"] = sampling_topk;
  j["max_batch_size"] = max_batch_size;
  j["min_length"] = min_length;
  j["max_length"] = max_length;
  j["overrides"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : overrides) j["overrides"][k] = v;
  return j.dump(2) + "\n";
}

void emit_training_config(const std::filesystem::path& path, const TrainConfigArtifact& config) {
  write_file(path, config.to_json());
}

void emit_inference_config(const std::filesystem::path& path, const InferConfigArtifact& config) {
  write_file(path, config.to_json());
}

// --- batches --------------------------------------------------------------------

std::vector<PromptRecord> render_batch(const Corpus& corpus, const LangTag& target, PromptKind kind) {
  std::vector<PromptRecord> out;
  out.reserve(corpus.size());
  const std::string tgt_name = language_name(target);
  for (const auto& u : corpus.units()) {
    PromptRecord r;
    r.unit_id = u.id;
    r.kind = kind;
    r.source_lang_name = language_name(u.source_lang);
    r.target_lang_name = tgt_name;
    if (kind == PromptKind::kInference) {
      r.rendered = render_inference_prompt(r.source_lang_name, tgt_name, u.source);
    } else {
      const std::string* t = u.target(target);
      if (t == nullptr) throw ValidationError("unit '" + u.id + "' has no target for " + target.code());
      r.rendered = render_training_example(r.source_lang_name, tgt_name, u.source, *t);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string record_to_json_line(const PromptRecord& record) {
  nlohmann::ordered_json j;
  j["id"] = record.unit_id;
  j[record.kind == PromptKind::kInference ? "prompt" : "text"] = record.rendered;
  return j.dump();
}

void write_records(const std::filesystem::path& path, const std::vector<PromptRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json_line(r);
    out.push_back('\n');
  }
  write_file(path, out);
}

}  // namespace tmforge::promptkit
