#include "tmforge/report.hpp"

#include <charconv>
#include <cstdio>
#include <map>

#include <nlohmann/json.hpp>

#include "tmforge/error.hpp"
#include "tmforge/text.hpp"

namespace tmforge::report {

std::string_view to_string(SizeLabel s) {
  switch (s) {
    case SizeLabel::kGpt35: return "gpt35";
    case SizeLabel::kBaseline: return "baseline";
    case SizeLabel::k1k: return "1k";
    case SizeLabel::k2k: return "2k";
    case SizeLabel::k5k: return "5k";
    case SizeLabel::k10k: return "10k";
    case SizeLabel::k14_7k: return "14.7k";
    case SizeLabel::k100kPlus: return "100k+";
  }
  return "?";
}

SizeLabel parse_size_label(std::string_view s) {
  for (SizeLabel l : kSizeLabels) {
    if (to_string(l) == s) return l;
  }
  throw ValidationError("unknown size label '" + std::string(s) + "'");
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kBleu: return "BLEU";
    case Metric::kChrf: return "chrF++";
    case Metric::kTer: return "TER";
    case Metric::kComet: return "COMET";
  }
  return "?";
}

bool higher_is_better(Metric m) { return m != Metric::kTer; }

std::optional<double> RunRow::value(Metric m) const {
  switch (m) {
    case Metric::kBleu: return bleu;
    case Metric::kChrf: return chrf;
    case Metric::kTer: return ter;
    case Metric::kComet: return comet;
  }
  return std::nullopt;
}

const std::optional<MetricDelta> DeltaSummary::get(Metric m) const {
  switch (m) {
    case Metric::kBleu: return bleu;
    case Metric::kChrf: return chrf;
    case Metric::kTer: return ter;
    case Metric::kComet: return comet;
  }
  return std::nullopt;
}

void RunTable::add(RunRow row) {
  if (find(row.language, row.size) != nullptr) {
    throw ValidationError("duplicate row for (" + row.language.code() + ", " + std::string(to_string(row.size)) + ")");
  }
  for (Metric m : kMetrics) {
    const auto v = row.value(m);
    if (v && !(*v >= 0.0 && *v <= 200.0)) {
      throw ValidationError(std::string(to_string(m)) + " score out of range for (" + row.language.code() + ", " +
                            std::string(to_string(row.size)) + ")");
    }
  }
  rows_.push_back(std::move(row));
}

const RunRow* RunTable::find(const LangTag& lang, SizeLabel size) const {
  for (const auto& r : rows_) {
    if (r.language == lang && r.size == size) return &r;
  }
  return nullptr;
}

std::vector<LangTag> RunTable::languages() const {
  std::vector<LangTag> out;
  for (const auto& r : rows_) {
    if (std::find(out.begin(), out.end(), r.language) == out.end()) out.push_back(r.language);
  }
  return out;
}

// --- loading --------------------------------------------------------------------

namespace {

double parse_score(std::string_view cell, const std::string& where) {
  double v = 0.0;
  const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (r.ec != std::errc() || r.ptr != cell.data() + cell.size()) {
    throw ValidationError(where + ": not a number: '" + std::string(cell) + "'");
  }
  return v;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(text::strip(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string column_key(std::string_view name) {
  std::string k = text::to_lower(name);
  if (k == "chrf++" || k == "chrf") return "chrf";
  return k;
}

}  // namespace

RunTable parse_run_table_csv(std::string_view data) {
  RunTable table;
  const auto lines = nonblank_lines(text::strip_bom(data));
  if (lines.empty()) return table;
  std::map<std::string, std::size_t> col;
  const auto header = split_commas(lines[0].second);
  for (std::size_t i = 0; i < header.size(); ++i) col[column_key(header[i])] = i;
  for (const char* need : {"language", "size", "bleu", "chrf", "ter"}) {
    if (col.count(need) == 0) throw ValidationError(std::string("run table lacks column '") + need + "'");
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string where = "line " + std::to_string(lines[li].first);
    const auto cells = split_commas(lines[li].second);
    if (cells.size() != header.size()) throw ValidationError(where + ": expected " + std::to_string(header.size()) + " cells");
    RunRow row;
    row.language = LangTag::parse(cells[col["language"]]);
    row.size = parse_size_label(cells[col["size"]]);
    row.bleu = parse_score(cells[col["bleu"]], where);
    row.chrf = parse_score(cells[col["chrf"]], where);
    row.ter = parse_score(cells[col["ter"]], where);
    if (const auto it = col.find("comet"); it != col.end() && !cells[it->second].empty()) {
      row.comet = parse_score(cells[it->second], where);
    }
    table.add(std::move(row));
  }
  return table;
}

RunTable parse_run_table_json(std::string_view data) {
  RunTable table;
  if (text::strip(data).empty()) return table;
  const auto j = nlohmann::json::parse(data, nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw ParseError("run table JSON must be an array of rows");
  for (const auto& o : j) {
    try {
      RunRow row;
      row.language = LangTag::parse(o.at("language").get<std::string>());
      row.size = parse_size_label(o.at("size").get<std::string>());
      row.bleu = o.at("bleu").get<double>();
      row.chrf = o.contains("chrf") ? o.at("chrf").get<double>() : o.at("chrf++").get<double>();
      row.ter = o.at("ter").get<double>();
      if (o.contains("comet") && !o.at("comet").is_null()) row.comet = o.at("comet").get<double>();
      table.add(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(std::string("invalid run table row: ") + e.what());
    }
  }
  return table;
}

RunTable load_run_table(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (path.extension() == ".json") return parse_run_table_json(data);
  return parse_run_table_csv(data);
}

// --- deltas ---------------------------------------------------------------------

DeltaSummary delta_summary(const RunTable& table, SizeLabel size) {
  DeltaSummary s;
  s.size = size;
  MetricDelta comet;
  for (const LangTag& lang : table.languages()) {
    const RunRow* at = table.find(lang, size);
    if (at == nullptr) continue;
    const RunRow* base = table.find(lang, SizeLabel::kBaseline);
    if (base == nullptr) throw ValidationError("no baseline row for language " + lang.code());
    auto add = [](MetricDelta& d, double value, double baseline, bool higher) {
      const double diff = higher ? value - baseline : baseline - value;
      d.absolute += diff;
      d.relative_percent += 100.0 * diff / baseline;
      ++d.languages;
    };
    add(s.bleu, at->bleu, base->bleu, true);
    add(s.chrf, at->chrf, base->chrf, true);
    add(s.ter, at->ter, base->ter, false);
    if (at->comet && base->comet) add(comet, *at->comet, *base->comet, true);
  }
  auto finish = [](MetricDelta& d) {
    if (d.languages == 0) return;
    d.absolute /= static_cast<double>(d.languages);
    d.relative_percent /= static_cast<double>(d.languages);
  };
  finish(s.bleu);
  finish(s.chrf);
  finish(s.ter);
  if (comet.languages > 0) {
    finish(comet);
    s.comet = comet;
  }
  return s;
}

double relative_gain(const RunTable& table, const LangTag& lang, SizeLabel size, Metric metric) {
  const RunRow* at = table.find(lang, size);
  const RunRow* base = table.find(lang, SizeLabel::kBaseline);
  if (at == nullptr || base == nullptr) {
    throw ValidationError("missing row for " + lang.code() + " at " + std::string(to_string(size)) + " or baseline");
  }
  const auto v = at->value(metric);
  const auto b = base->value(metric);
  if (!v || !b) throw ValidationError(std::string(to_string(metric)) + " missing for " + lang.code());
  const double diff = higher_is_better(metric) ? *v - *b : *b - *v;
  return 100.0 * diff / *b;
}

// --- markers --------------------------------------------------------------------

std::vector<std::array<CellMark, 4>> best_worst_markers(const RunTable& table) {
  const auto& rows = table.rows();
  std::vector<std::array<CellMark, 4>> marks(rows.size());
  for (const LangTag& lang : table.languages()) {
    for (std::size_t mi = 0; mi < kMetrics.size(); ++mi) {
      const Metric m = kMetrics[mi];
      std::optional<double> best;
      std::optional<double> worst;
      for (const auto& r : rows) {
        if (r.language != lang || r.size == SizeLabel::kGpt35) continue;
        const auto v = r.value(m);
        if (!v) continue;
        const bool better = higher_is_better(m);
        if (!best || (better ? *v > *best : *v < *best)) best = v;
        if (!worst || (better ? *v < *worst : *v > *worst)) worst = v;
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.language != lang || r.size == SizeLabel::kGpt35) continue;
        const auto v = r.value(m);
        if (!v) continue;
        marks[i][mi].best = *v == *best;
        marks[i][mi].worst = *v == *worst;
      }
    }
  }
  return marks;
}

// --- rendering ------------------------------------------------------------------

Format parse_format(std::string_view s) {
  if (s == "markdown" || s == "md") return Format::kMarkdown;
  if (s == "csv") return Format::kCsv;
  throw ValidationError("unknown format '" + std::string(s) + "' (expected markdown or csv)");
}

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string signed2(double v) { return (v >= 0 ? "+" : "") + fixed2(v); }

std::string render_csv(const RunTable& table) {
  std::string out = "language,size,bleu,chrf,ter,comet\n";
  for (const auto& r : table.rows()) {
    out += r.language.code() + "," + std::string(to_string(r.size)) + "," + shortest(r.bleu) + "," +
           shortest(r.chrf) + "," + shortest(r.ter) + "," + (r.comet ? shortest(*r.comet) : "") + "\n";
  }
  return out;
}

std::string render_markdown(const RunTable& table, const std::vector<DeltaSummary>& summaries) {
  std::string out = "| Language | Size | BLEU | chrF++ | TER | COMET |\n|---|---|---:|---:|---:|---:|\n";
  const auto marks = best_worst_markers(table);
  const auto& rows = table.rows();
  for (const LangTag& lang : table.languages()) {
    for (SizeLabel size : kSizeLabels) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.language != lang || r.size != size) continue;
        out += "| " + lang.code() + " | " + std::string(to_string(size)) + " |";
        for (std::size_t mi = 0; mi < kMetrics.size(); ++mi) {
          const auto v = r.value(kMetrics[mi]);
          std::string cell = v ? fixed2(*v) : "";
          if (v && marks[i][mi].best) cell = "**" + cell + "**";
          if (v && marks[i][mi].worst) cell = "<u>" + cell + "</u>";
          out += " " + cell + " |";
        }
        out += "\n";
      }
    }
  }
  if (!summaries.empty()) {
    out += "\n| Size | Metric | Mean delta | Mean relative delta (%) | Languages |\n|---|---|---:|---:|---:|\n";
    for (const auto& s : summaries) {
      for (Metric m : kMetrics) {
        const auto d = s.get(m);
        if (!d) continue;
        out += "| " + std::string(to_string(s.size)) + " | " + std::string(to_string(m)) +
               (m == Metric::kTer ? " (decrease)" : "") + " | " + signed2(d->absolute) + " | " +
               signed2(d->relative_percent) + " | " + std::to_string(d->languages) + " |\n";
      }
    }
  }
  return out;
}

}  // namespace

std::string render(const RunTable& table, const std::vector<DeltaSummary>& summaries, Format format) {
  return format == Format::kCsv ? render_csv(table) : render_markdown(table, summaries);
}

}  // namespace tmforge::report
