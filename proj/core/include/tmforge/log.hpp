#pragma once

#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tmforge::log {

enum class Level { kDebug, kInfo, kWarn, kError };

std::string_view to_string(Level level);

struct Record {
  Level level;
  std::string event;
  std::vector<std::pair<std::string, std::string>> fields;

  /// Value of the first field named `key`, or empty.
  std::string field(std::string_view key) const;
};

using Sink = std::function<void(const Record&)>;

/// Default sink writes one JSON object per line to stderr.
void set_sink(Sink sink);
void reset_sink();
void set_min_level(Level level);

void emit(Level level, std::string_view event,
          std::initializer_list<std::pair<std::string_view, std::string>> fields = {});

inline void info(std::string_view event,
                 std::initializer_list<std::pair<std::string_view, std::string>> fields = {}) {
  emit(Level::kInfo, event, fields);
}
inline void warn(std::string_view event,
                 std::initializer_list<std::pair<std::string_view, std::string>> fields = {}) {
  emit(Level::kWarn, event, fields);
}

/// Formats a record as a single JSON line (no trailing newline).
std::string to_json_line(const Record& record);

/// Collects records for the lifetime of the object; restores the stderr sink after.
class Capture {
 public:
  Capture();
  ~Capture();
  Capture(const Capture&) = delete;
  Capture& operator=(const Capture&) = delete;

  const std::vector<Record>& records() const { return records_; }
  std::size_t count(std::string_view event) const;

 private:
  std::vector<Record> records_;
};

}  // namespace tmforge::log
