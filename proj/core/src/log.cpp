#include "tmforge/log.hpp"

#include <iostream>
#include <mutex>

#include <nlohmann/json.hpp>

namespace tmforge::log {
namespace {

std::mutex g_mutex;
Sink g_sink;
Level g_min_level = Level::kInfo;

void write_stderr(const Record& record) {
  std::cerr << to_json_line(record) << '\n';
}

}  // namespace

std::string_view to_string(Level level) {
  switch (level) {
    case Level::kDebug: return "debug";
    case Level::kInfo: return "info";
    case Level::kWarn: return "warn";
    case Level::kError: return "error";
  }
  return "info";
}

std::string Record::field(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return v;
  }
  return {};
}

void set_sink(Sink sink) {
  std::lock_guard lock(g_mutex);
  g_sink = std::move(sink);
}

void reset_sink() { set_sink(nullptr); }

void set_min_level(Level level) {
  std::lock_guard lock(g_mutex);
  g_min_level = level;
}

void emit(Level level, std::string_view event,
          std::initializer_list<std::pair<std::string_view, std::string>> fields) {
  Record record{level, std::string(event), {}};
  record.fields.reserve(fields.size());
  for (const auto& [k, v] : fields) record.fields.emplace_back(std::string(k), v);

  std::lock_guard lock(g_mutex);
  if (g_sink) {
    g_sink(record);
    return;
  }
  if (level < g_min_level) return;
  write_stderr(record);
}

std::string to_json_line(const Record& record) {
  nlohmann::ordered_json j;
  j["level"] = to_string(record.level);
  j["event"] = record.event;
  for (const auto& [k, v] : record.fields) j[k] = v;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

Capture::Capture() {
  set_sink([this](const Record& r) { records_.push_back(r); });
}

Capture::~Capture() { reset_sink(); }

std::size_t Capture::count(std::string_view event) const {
  std::size_t n = 0;
  for (const auto& r : records_) n += (r.event == event);
  return n;
}

}  // namespace tmforge::log
