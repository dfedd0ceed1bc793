#pragma once

#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace atmsim {

using OrderedJson = nlohmann::ordered_json;

/// JSON Lines event log. Field order is fixed by construction order of the
/// records, and doubles are serialized with shortest round-trip formatting,
/// so identical runs produce byte-identical logs.
class EventLog {
 public:
  EventLog() = default;  // disabled sink

  static EventLog to_file(const std::string& path);
  static EventLog to_memory();

  bool enabled() const { return file_ != nullptr || lines_ != nullptr; }

  void write(const OrderedJson& record);

  /// Only valid for a memory log.
  const std::vector<std::string>& lines() const { return *lines_; }

  void close();

 private:
  std::shared_ptr<std::ofstream> file_;
  std::shared_ptr<std::vector<std::string>> lines_;
};

}  // namespace atmsim
