#include "atmsim/eventlog.hpp"

#include <stdexcept>

namespace atmsim {

EventLog EventLog::to_file(const std::string& path) {
  EventLog log;
  log.file_ = std::make_shared<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!log.file_->is_open()) throw std::runtime_error("cannot open event log: " + path);
  return log;
}

EventLog EventLog::to_memory() {
  EventLog log;
  log.lines_ = std::make_shared<std::vector<std::string>>();
  return log;
}

void EventLog::write(const OrderedJson& record) {
  if (file_) {
    *file_ << record.dump() << '\n';
  } else if (lines_) {
    lines_->push_back(record.dump());
  }
}

void EventLog::close() {
  if (file_) {
    file_->flush();
    file_.reset();
  }
}

}  // namespace atmsim
