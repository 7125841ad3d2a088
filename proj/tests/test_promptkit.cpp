#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <random>

#include "tmforge/corpus.hpp"
#include "tmforge/error.hpp"
#include "tmforge/ingest.hpp"
#include "tmforge/promptkit.hpp"

using namespace tmforge;
using namespace tmforge::promptkit;

namespace {
const std::filesystem::path kFixtures = TMFORGE_FIXTURES_DIR;
}

TEST(Prompt, InferenceGoldenBytes) {
  const std::string golden = read_file(kFixtures / "prompts/en-de.inference.golden");
  EXPECT_EQ(render_inference_prompt("English", "German", "Tap Save to keep your changes."), golden);
}

TEST(Prompt, TrainingGoldenBytes) {
  const std::string golden = read_file(kFixtures / "prompts/en-de.training.golden");
  EXPECT_EQ(render_training_example("English", "German", "Tap Save to keep your changes.",
                                    "Tippen Sie auf \"Speichern\", um Ihre Änderungen zu behalten."),
            golden);
}

TEST(Prompt, SpliceIsVerbatim) {
  const std::string p = render_inference_prompt("English", "German", "a {b} \"c\" \\n");
  EXPECT_NE(p.find("\n\na {b} \"c\" \\n<|eot_id|>"), std::string::npos);
  EXPECT_THROW(render_inference_prompt("English", "German", ""), ValidationError);
  EXPECT_THROW(render_training_example("English", "German", "Hi", ""), ValidationError);
}

TEST(Prompt, PayloadEscaping) {
  EXPECT_EQ(render_payload("Hallo"), "{\"translation\": \"Hallo\"}");
  EXPECT_EQ(render_payload("a\"b\\c\n"), "{\"translation\": \"a\\\"b\\\\c\\n\"}");
  const std::string t = render_training_example("English", "German", "Hello", "Hallo");
  EXPECT_TRUE(t.ends_with("<|start_header_id|>assistant<|end_header_id|>{\"translation\": \"Hallo\"}<|end_of_text|>"));
}

TEST(LanguageNames, Table) {
  EXPECT_EQ(language_name(LangTag::parse("pt-BR")), "Brazilian Portuguese");
  EXPECT_EQ(language_name(LangTag::parse("cs")), "Czech");
  EXPECT_EQ(language_name(LangTag::parse("de-AT")), "German");
  EXPECT_EQ(language_name(LangTag::parse("fi")), "Finnish");
  EXPECT_EQ(language_name(LangTag::parse("ko")), "Korean");
  EXPECT_EQ(language_name(LangTag::parse("en")), "English");
  EXPECT_THROW(language_name(LangTag::parse("xx")), ValidationError);
}

TEST(Extract, SpecExamples) {
  EXPECT_EQ(extract_translation("{\"translation\": \"Hallo Welt\"}assistant...garbage"), "Hallo Welt");
  EXPECT_EQ(extract_translation("{\"translation\": \"line1\\nline2\"}"), "line1 line2");
  EXPECT_EQ(extract_translation("{\"translation\": \"Olá<br>mundo<p>\"}"), "Olá mundo");
}

TEST(Extract, PostprocessFixtures) {
  const std::string data = read_file(kFixtures / "prompts/postprocess.jsonl");
  std::size_t n = 0;
  for (const auto& [line_no, line] : nonblank_lines(data)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(extract_translation(j["raw"].get<std::string>()), j["expected"].get<std::string>()) << "line " << line_no;
    ++n;
  }
  EXPECT_GE(n, 9u);
}

TEST(Extract, NoPayloadIsStructuredError) {
  try {
    extract_translation("I cannot translate that.");
    FAIL();
  } catch (const ExtractionError& e) {
    EXPECT_EQ(e.raw(), "I cannot translate that.");
  }
}

TEST(Extract, RoundTripRandomTargets) {
  std::mt19937 rng(8);
  const std::vector<std::string> pieces = {"a", "Z", " ", "\"", "\\", "{", "}", "é", "설", "ä", ":", ",", "<br>",
                                           "\n", "\t", "assistant", "}assistant", "<p>", "&amp;", "/", "'"};
  for (int i = 0; i < 1000; ++i) {
    std::string target = "x";
    for (int k = 0, n = static_cast<int>(rng() % 20); k < n; ++k) target += pieces[rng() % pieces.size()];
    const std::string example = render_training_example("English", "German", "Hello", target);
    const std::string marker = "<|start_header_id|>assistant<|end_header_id|>";
    std::string completion = example.substr(example.rfind(marker) + marker.size());
    completion = completion.substr(0, completion.size() - kEndOfText.size());
    if (target.find("}assistant") != std::string::npos) continue;
    EXPECT_EQ(extract_translation(completion), postprocess(target)) << target;
  }
}

TEST(Extract, TotalOnArbitraryBytes) {
  std::mt19937 rng(13);
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    for (int k = 0, n = static_cast<int>(rng() % 40); k < n; ++k) {
      const char pool[] = "{}\"\\:translation \n<>/\x80\xff\xc3";
      s += pool[rng() % (sizeof pool - 1)];
    }
    try {
      extract_translation(s);
    } catch (const ExtractionError&) {
    }
  }
  std::string deep(100000, '{');
  EXPECT_THROW(extract_translation(deep), ExtractionError);
}

TEST(Configs, TableDefaults) {
  const auto train = nlohmann::json::parse(TrainConfigArtifact{}.to_json());
  EXPECT_EQ(train["lora"]["r"], 64);
  EXPECT_EQ(train["lora"]["lora_alpha"], 16);
  EXPECT_DOUBLE_EQ(train["lora"]["lora_dropout"].get<double>(), 0.1);
  EXPECT_EQ(train["training"]["per_device_train_batch_size"], 32);
  EXPECT_DOUBLE_EQ(train["training"]["learning_rate"].get<double>(), 2e-3);
  EXPECT_EQ(train["training"]["lr_scheduler_type"], "constant");
  EXPECT_EQ(train["quantization"]["bnb_4bit_quant_type"], "nf4");
  const auto infer = nlohmann::json::parse(InferConfigArtifact{}.to_json());
  EXPECT_EQ(infer["sampling_topk"], 1);
  EXPECT_EQ(infer["max_batch_size"], 8096);
  EXPECT_EQ(infer["min_length"], 1);
  EXPECT_EQ(infer["max_length"], "2*source_length");
}

TEST(Configs, OverrideRecorded) {
  TrainConfigArtifact t;
  t.set("training.learning_rate", "1e-4");
  const auto j = nlohmann::json::parse(t.to_json());
  EXPECT_DOUBLE_EQ(j["training"]["learning_rate"].get<double>(), 1e-4);
  EXPECT_EQ(j["overrides"]["training.learning_rate"], "1e-4");
  EXPECT_THROW(t.set("training.nope", "1"), ValidationError);
  EXPECT_THROW(t.set("lora.r", "many"), ValidationError);
}

TEST(Batch, RendersPerUnit) {
  TransUnit u;
  u.id = "x:0";
  u.source = "Save";
  u.source_lang = LangTag::parse("en");
  u.targets.emplace(LangTag::parse("fi"), "Tallenna");
  const Corpus c({u});
  const auto recs = render_batch(c, LangTag::parse("fi"), PromptKind::kTraining);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].target_lang_name, "Finnish");
  const auto j = nlohmann::json::parse(record_to_json_line(recs[0]));
  EXPECT_EQ(j["id"], "x:0");
  EXPECT_TRUE(j.contains("text"));
}
