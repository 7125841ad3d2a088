// One PASS/FAIL line per acceptance criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "synth.hpp"
#include "tmforge/corpus.hpp"
#include "tmforge/decontam.hpp"
#include "tmforge/log.hpp"
#include "tmforge/metrics.hpp"
#include "tmforge/partition.hpp"
#include "tmforge/pipeline.hpp"
#include "tmforge/promptkit.hpp"
#include "tmforge/report.hpp"

using namespace tmforge;

namespace {

const std::filesystem::path kFixtures = TMFORGE_FIXTURES_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void check(bool ok, const std::string& what) {
    if (!ok) {
      out_.pass = false;
      if (failures_++ < 5) out_.detail += (out_.detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& s) { out_.detail += (out_.detail.empty() ? "" : "; ") + s; }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
  int failures_ = 0;
};

std::string fmt(double v, int prec = 2) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// 1 ------------------------------------------------------------------------------

Outcome metric_goldens() {
  Checker c;
  std::vector<std::string> ids, hyps, refs;
  const std::string data = read_file(kFixtures / "metrics/pairs.jsonl");
  std::set<std::string> langs;
  for (const auto& [n, line] : nonblank_lines(data)) {
    const auto j = nlohmann::json::parse(line);
    ids.push_back(j["id"]);
    hyps.push_back(j["hyp"]);
    refs.push_back(j["ref"]);
    langs.insert(j["lang"].get<std::string>());
  }
  c.check(ids.size() == 10 && langs.count("ko") && langs.count("fi"), "fixture must hold 10 pairs incl. ko and fi");
  const auto g = nlohmann::json::parse(read_file(kFixtures / "metrics/goldens.json"));
  double worst = 0.0;
  auto cmp = [&](double got, double want, const std::string& what) {
    worst = std::max(worst, std::fabs(got - want));
    c.check(near(got, want, 0.01), what + " " + fmt(got, 4) + " vs " + fmt(want, 4));
  };
  cmp(metrics::bleu(hyps, refs).score, g["corpus"]["bleu"], "corpus BLEU");
  cmp(metrics::chrf_pp(hyps, refs).score, g["corpus"]["chrf_pp"], "corpus chrF++");
  cmp(metrics::ter(hyps, refs).score, g["corpus"]["ter"], "corpus TER");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& p = g["pairs"][ids[i]];
    cmp(metrics::bleu({hyps[i]}, {refs[i]}).score, p["bleu"], ids[i] + " BLEU");
    cmp(metrics::chrf_pp({hyps[i]}, {refs[i]}).score, p["chrf_pp"], ids[i] + " chrF++");
    cmp(metrics::ter({hyps[i]}, {refs[i]}).score, p["ter"], ids[i] + " TER");
  }
  c.note("max abs diff " + fmt(worst, 6));
  return c.result();
}

// 2 ------------------------------------------------------------------------------

Outcome metric_properties() {
  Checker c;
  std::mt19937_64 rng(2024);
  const auto vocab = synth::vocabulary(rng, 400);
  const std::vector<std::string> punct = {",", ".", "!", "?", "(", ")", "3.5", "-", "'s"};
  auto sentence = [&] {
    std::string s;
    for (int k = 0, n = 4 + static_cast<int>(rng() % 17); k < n; ++k) {
      s += (k ? " " : "") + (rng() % 6 == 0 ? punct[rng() % punct.size()] : vocab[rng() % vocab.size()]);
    }
    return s;
  };
  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<std::string> x, y;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 10); i < n; ++i) {
      x.push_back(sentence());
      y.push_back(rng() % 3 == 0 ? synth::mutate(rng, x.back(), vocab) : sentence());
    }
    const std::string tag = "corpus " + std::to_string(iter);
    c.check(near(metrics::bleu(x, x).score, 100.0, 1e-9), tag + " bleu(x,x)");
    c.check(near(metrics::chrf_pp(x, x).score, 100.0, 1e-9), tag + " chrf(x,x)");
    c.check(metrics::ter(x, x).score == 0.0, tag + " ter(x,x)");
    const auto b = metrics::bleu(y, x);
    const double cf = metrics::chrf_pp(y, x).score;
    const double t = metrics::ter(y, x).score;
    c.check(b.score >= 0.0 && b.score <= 100.0, tag + " bleu range");
    c.check(cf >= 0.0 && cf <= 100.0, tag + " chrf range");
    c.check(t >= 0.0 && std::isfinite(t), tag + " ter range");
    if (b.count("sys_len") >= b.count("ref_len")) c.check(b.count("brevity_penalty") == 1.0, tag + " BP");
  }
  c.note("1000 corpora");
  return c.result();
}

// 3 ------------------------------------------------------------------------------

using Seq = std::vector<std::int8_t>;

std::vector<Seq> all_sequences(std::size_t max_len) {
  std::vector<Seq> out{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t before = out.size();
    for (std::size_t i = 0; i < before; ++i) {
      if (out[i].size() != len - 1) continue;
      for (std::int8_t s = 0; s < 3; ++s) {
        Seq t = out[i];
        t.push_back(s);
        out.push_back(t);
      }
    }
  }
  return out;
}

int small_lev(const Seq& a, const Seq& b) {
  int d[8][8];
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    }
  }
  return d[a.size()][b.size()];
}

Outcome ter_oracle() {
  Checker c;
  const auto seqs = all_sequences(6);
  const std::string names[] = {"a", "b", "c"};
  std::vector<std::vector<std::string>> words;
  for (const auto& s : seqs) {
    std::vector<std::string> w;
    for (auto x : s) w.push_back(names[x]);
    words.push_back(std::move(w));
  }
  const std::string reference = read_file(kFixtures / "metrics/ter_small.txt");
  std::size_t total = 0, diverged = 0, total4 = 0, diverged4 = 0, parity4 = 0, ref_k = 0;
  std::vector<std::string> examples;
  for (std::size_t hi = 0; hi < seqs.size(); ++hi) {
    oracle::Tokens h(seqs[hi].begin(), seqs[hi].end());
    std::vector<std::pair<int, Seq>> closure;
    for (const auto& [arr, moves] : oracle::shift_closure(h)) closure.emplace_back(moves, Seq(arr.begin(), arr.end()));
    std::stable_sort(closure.begin(), closure.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t ri = 0; ri < seqs.size(); ++ri) {
      int best = small_lev(seqs[hi], seqs[ri]);
      for (const auto& [moves, arr] : closure) {
        if (moves >= best) break;
        best = std::min(best, moves + small_lev(arr, seqs[ri]));
      }
      const auto got = metrics::translation_edit_rate(words[hi], words[ri]).edits;
      const bool small = seqs[hi].size() <= 4 && seqs[ri].size() <= 4;
      if (small && ref_k < reference.size()) parity4 += got == reference[ref_k++] - '0';
      ++total;
      total4 += small;
      c.check(got >= best, "greedy below optimum");
      if (got != best) {
        ++diverged;
        diverged4 += small;
        if (small && examples.size() < 3) {
          std::string e;
          for (auto x : seqs[hi]) e += names[x];
          e += "->";
          for (auto x : seqs[ri]) e += names[x];
          examples.push_back(e + " " + std::to_string(got) + ">" + std::to_string(best));
        }
      }
    }
  }
  const double rate = 100.0 * static_cast<double>(diverged) / static_cast<double>(total);
  c.check(rate < 0.5, "divergence " + fmt(rate, 3) + "% >= 0.5%");
  std::string ex;
  for (const auto& e : examples) ex += (ex.empty() ? "" : ", ") + e;
  c.check(diverged4 == 0, std::to_string(diverged4) + "/" + std::to_string(total4) +
                              " divergences at <=4 tokens, e.g. " + ex);
  c.check(parity4 == total4, "reference scorer parity " + std::to_string(parity4) + "/" + std::to_string(total4));
  c.note(std::to_string(diverged) + "/" + std::to_string(total) + " diverge (" + fmt(rate, 3) + "%); reference scorer parity " +
         std::to_string(parity4) + "/" + std::to_string(total4) + " at <=4 tokens");
  return c.result();
}

// 4 ------------------------------------------------------------------------------

Outcome decontam_oracle() {
  Checker c;
  std::size_t dropped = 0, boundary_kept = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 sizes(seed * 7919 + 1);
    const auto p = synth::planted(1000 + seed, 1 + sizes() % 500, 1 + sizes() % 100);
    decontam::DecontamConfig cfg;
    cfg.combine = seed % 2 ? decontam::Combine::kMean : decontam::Combine::kMax;
    const auto got = decontam::decontaminate(p.test, p.train, cfg);
    const auto want = oracle::brute_force_decontam(p.test, p.train, cfg);
    std::vector<std::string> kept_got, kept_want;
    for (const auto& u : got.kept.units()) kept_got.push_back(u.id);
    for (const auto& v : want) {
      if (!v.dropped) kept_want.push_back(v.test_unit_id);
      dropped += v.dropped;
    }
    std::sort(kept_got.begin(), kept_got.end());
    std::sort(kept_want.begin(), kept_want.end());
    c.check(kept_got == kept_want, "seed " + std::to_string(seed) + " kept-set differs");
    for (const auto& u : p.test.units()) {
      for (const auto& t : p.train.units()) {
        if (oracle::lev_sim(u.source, t.source) == 0.75 && oracle::ngram_jaccard(u.source, t.source, 5) == 0.0) {
          boundary_kept += std::binary_search(kept_got.begin(), kept_got.end(), u.id);
        }
      }
    }
  }
  c.check(boundary_kept > 0, "no exact-0.75 boundary pairs exercised");
  c.note(std::to_string(dropped) + " drops, " + std::to_string(boundary_kept) + " boundary pairs kept");
  return c.result();
}

// 5 ------------------------------------------------------------------------------

Outcome decontam_throughput() {
  Checker c;
  std::mt19937_64 rng(55);
  const auto vocab = synth::vocabulary(rng, 5000);
  std::vector<TransUnit> train, test;
  std::vector<std::string> sources;
  for (std::size_t i = 0; i < 200000; ++i) {
    sources.push_back(synth::sentence(rng, vocab));
    train.push_back(synth::unit("tr:" + std::to_string(i), sources.back()));
  }
  for (std::size_t i = 0; i < 2000; ++i) {
    const std::string s =
        rng() % 5 == 0 ? synth::mutate(rng, sources[rng() % sources.size()], vocab) : synth::sentence(rng, vocab);
    test.push_back(synth::unit("te:" + std::to_string(i), s));
  }
  const Corpus tr(std::move(train)), te(std::move(test));
  const unsigned cores = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = decontam::decontaminate(te, tr, {}, 0);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.check(secs < 60.0, fmt(secs, 1) + " s >= 60 s");
  c.note("200000 x 2000 in " + fmt(secs, 1) + " s on " + std::to_string(cores) + " core(s), " +
         std::to_string(r.drops.size()) + " drops");
  return c.result();
}

// 6 ------------------------------------------------------------------------------

Outcome split_reconciliation() {
  Checker c;
  std::vector<TransUnit> units;
  for (std::size_t i = 0; i < 18362; ++i) units.push_back(synth::unit("u" + std::to_string(i), "s " + std::to_string(i)));
  const Corpus shuffled = partition::seeded_shuffle(Corpus(std::move(units)), 20240611);
  const auto s = partition::split(shuffled, SplitRatios{0.8, 0.1, 0.1});
  c.check(s.train.size() == 14688 && s.dev.size() == 1837 && s.test.size() == 1837,
          "got " + std::to_string(s.train.size()) + "/" + std::to_string(s.dev.size()) + "/" +
              std::to_string(s.test.size()));
  const auto subsets = partition::nested_subsets(s.train, {1000, 2000, 5000, 10000});
  c.check(subsets.size() == 4, "subset count");
  for (const auto& sub : subsets) {
    bool prefix = sub.size() <= s.train.size();
    for (std::size_t i = 0; prefix && i < sub.size(); ++i) prefix = sub[i].id == s.train[i].id;
    c.check(prefix, "subset " + std::to_string(sub.size()) + " not a prefix");
  }
  c.note(std::to_string(s.train.size()) + "/" + std::to_string(s.dev.size()) + "/" + std::to_string(s.test.size()));
  return c.result();
}

// 7 ------------------------------------------------------------------------------

Outcome prompt_exactness() {
  Checker c;
  const std::string golden = read_file(kFixtures / "prompts/en-de.inference.golden");
  const std::string rendered = promptkit::render_inference_prompt("English", "German", "Tap Save to keep your changes.");
  c.check(rendered == golden, "inference prompt differs from golden");
  const std::string train_golden = read_file(kFixtures / "prompts/en-de.training.golden");
  c.check(promptkit::render_training_example("English", "German", "Tap Save to keep your changes.",
                                             "Tippen Sie auf \"Speichern\", um Ihre Änderungen zu behalten.") ==
              train_golden,
          "training example differs from golden");
  std::mt19937 rng(1234);
  const std::vector<std::string> pieces = {"Save", "Ä", "설정", " ", "\"", "\\", "{", "}", ":", ",", "<br>", "<p>",
                                           "\n", "\t", "/", "'", "&amp;", "%1$s", "assistant", "ü", "\r\n"};
  const std::string marker = "<|start_header_id|>assistant<|end_header_id|>";
  int checked = 0;
  while (checked < 1000) {
    std::string target = pieces[rng() % 3];
    for (int k = 0, n = static_cast<int>(rng() % 24); k < n; ++k) target += pieces[rng() % pieces.size()];
    if (target.find("}assistant") != std::string::npos) continue;
    const std::string example = promptkit::render_training_example("English", "German", "Hello", target);
    std::string completion = example.substr(example.rfind(marker) + marker.size());
    completion.resize(completion.size() - promptkit::kEndOfText.size());
    std::string got;
    try {
      got = promptkit::extract_translation(completion);
    } catch (const std::exception& e) {
      got = std::string("<error ") + e.what() + ">";
    }
    c.check(got == promptkit::postprocess(target), "round-trip failed for target " + nlohmann::json(target).dump());
    ++checked;
  }
  c.note("golden byte-exact, 1000 round-trips");
  return c.result();
}

// 8 ------------------------------------------------------------------------------

Outcome postprocess_fixtures() {
  Checker c;
  std::map<std::string, int> per_case;
  const std::string data = read_file(kFixtures / "prompts/postprocess.jsonl");
  for (const auto& [n, line] : nonblank_lines(data)) {
    const auto j = nlohmann::json::parse(line);
    const std::string want = j["expected"];
    std::string got;
    try {
      got = promptkit::extract_translation(j["raw"].get<std::string>());
    } catch (const std::exception& e) {
      got = e.what();
    }
    c.check(got == want, "line " + std::to_string(n) + " got " + nlohmann::json(got).dump());
    ++per_case[j["case"].get<std::string>()];
  }
  for (const char* k : {"stop-marker", "newline", "html"}) c.check(per_case[k] > 0, std::string("no ") + k + " cases");
  std::string counts;
  for (const auto& [k, v] : per_case) counts += (counts.empty() ? "" : " ") + k + "=" + std::to_string(v);
  c.note(counts);
  return c.result();
}

// 9 ------------------------------------------------------------------------------

Outcome report_aggregates() {
  Checker c;
  using report::Metric;
  using report::SizeLabel;
  const auto t = report::load_run_table(kFixtures / "report/runs.csv");
  const auto mid = report::delta_summary(t, SizeLabel::k14_7k);
  const auto big = report::delta_summary(t, SizeLabel::k100kPlus);
  auto want = [&](double got, double target, double tol, const std::string& what) {
    c.check(near(got, target, tol), what + " " + fmt(got) + " not within " + fmt(target) + " +/- " + fmt(tol));
  };
  want(mid.bleu.absolute, 4.8, 0.05, "14.7k BLEU delta");
  want(mid.bleu.relative_percent, 17.42, 0.05, "14.7k BLEU relative");
  want(mid.chrf.absolute, 7.1, 0.1, "14.7k chrF++ delta");
  want(mid.comet ? mid.comet->absolute : NAN, 16.9, 0.1, "14.7k COMET delta");
  want(mid.ter.absolute, 9.0, 0.1, "14.7k TER decrease");
  want(big.bleu.absolute, 13.7, 0.1, "100k+ BLEU delta");
  want(big.chrf.absolute, 12.7, 0.1, "100k+ chrF++ delta");
  want(big.comet ? big.comet->absolute : NAN, 25.0, 0.1, "100k+ COMET delta");
  want(big.ter.absolute, 15.5, 0.1, "100k+ TER decrease");
  const double ko = report::relative_gain(t, LangTag::parse("ko"), SizeLabel::k100kPlus, Metric::kComet);
  want(ko, 130.0, 1.0, "KO COMET relative gain (table rows 36.45 -> 84.30)");
  c.note("14.7k BLEU " + fmt(mid.bleu.absolute) + " / " + fmt(mid.bleu.relative_percent) + "%, KO COMET " + fmt(ko) +
         "%");
  return c.result();
}

// 10 -----------------------------------------------------------------------------

Outcome config_goldens() {
  Checker c;
  const auto dir = std::filesystem::temp_directory_path() / "tmforge_acceptance_configs";
  std::filesystem::remove_all(dir);
  promptkit::emit_training_config(dir / "training.json");
  promptkit::emit_inference_config(dir / "inference.json");
  const auto tr = nlohmann::json::parse(read_file(dir / "training.json"));
  const auto in = nlohmann::json::parse(read_file(dir / "inference.json"));
  c.check(tr["lora"]["r"] == 64, "lora r");
  c.check(tr["lora"]["lora_alpha"] == 16, "lora alpha");
  c.check(tr["lora"]["lora_dropout"] == 0.1, "lora dropout");
  c.check(tr["training"]["per_device_train_batch_size"] == 32, "batch size");
  c.check(tr["training"]["learning_rate"] == 2e-3, "learning rate");
  c.check(tr["quantization"]["bnb_4bit_quant_type"] == "nf4", "quant type");
  c.check(tr["training"]["lr_scheduler_type"] == "constant", "scheduler");
  c.check(in["sampling_topk"] == 1, "topk");
  c.check(in["max_batch_size"] == 8096, "inference batch");
  c.check(in["min_length"] == 1, "min length");
  c.check(in["max_length"] == "2*source_length", "max length rule");
  std::filesystem::remove_all(dir);
  return c.result();
}

// 11 -----------------------------------------------------------------------------

Outcome pipeline_determinism() {
  Checker c;
  auto cfg = pipeline::load_config(kFixtures / "toy/pipeline.json");
  const auto base = std::filesystem::temp_directory_path() / "tmforge_acceptance_pipeline";
  std::filesystem::remove_all(base);
  cfg.output_dir = base / "a";
  const auto a = pipeline::run_pipeline(cfg, 1);
  cfg.output_dir = base / "b";
  const auto b = pipeline::run_pipeline(cfg, 0);
  c.check(a.tree_digest == b.tree_digest, "digests differ");
  c.check(pipeline::tree_digest(base / "a") == pipeline::tree_digest(base / "b"), "on-disk trees differ");
  c.check(a.artifacts.size() == b.artifacts.size() && !a.artifacts.empty(), "artifact lists differ");
  c.note(std::to_string(a.artifacts.size()) + " files, digest " + a.tree_digest.substr(0, 16));
  std::filesystem::remove_all(base);
  return c.result();
}

}  // namespace

int main() {
  log::set_min_level(log::Level::kError);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric goldens", metric_goldens},
      {"metric identity/range properties", metric_properties},
      {"TER oracle equivalence", ter_oracle},
      {"decontamination oracle equivalence", decontam_oracle},
      {"decontamination throughput", decontam_throughput},
      {"split reconciliation", split_reconciliation},
      {"prompt byte-exactness + round-trip", prompt_exactness},
      {"post-processing fixtures", postprocess_fixtures},
      {"aggregate reproduction", report_aggregates},
      {"config artifact goldens", config_goldens},
      {"pipeline determinism", pipeline_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << " [" << fmt(secs, 2)
              << " s] " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
