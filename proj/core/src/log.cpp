#include "flicksim/log.hpp"

#include <filesystem>
#include <stdexcept>

namespace flicksim {

EventLog::EventLog(std::string dir, bool flush_every_append)
    : dir_(std::move(dir)), flush_(flush_every_append) {
  if (!dir_.empty()) std::filesystem::create_directories(dir_);
}

EventLog::Topic& EventLog::topic_for_append(const std::string& name) {
  {
    std::shared_lock lk(topics_mu_);
    auto it = topics_.find(name);
    if (it != topics_.end()) return *it->second;
  }
  std::unique_lock lk(topics_mu_);
  auto& slot = topics_[name];
  if (!slot) {
    slot = std::make_unique<Topic>();
    if (!dir_.empty()) {
      auto path = std::filesystem::path(dir_) / (name + ".log");
      slot->file.open(path, std::ios::app);
      if (!slot->file) {
        throw std::runtime_error("event log: cannot open " + path.string());
      }
    }
  }
  return *slot;
}

const EventLog::Topic* EventLog::find_topic(const std::string& name) const {
  std::shared_lock lk(topics_mu_);
  auto it = topics_.find(name);
  return it == topics_.end() ? nullptr : it->second.get();
}

std::uint64_t EventLog::append(const std::string& topic, std::string line) {
  Topic& t = topic_for_append(topic);
  std::unique_lock lk(t.mu);
  std::uint64_t offset = t.records.size();
  if (t.file.is_open()) {
    t.file << line << '\n';
    if (flush_) t.file.flush();
    if (!t.file) throw std::runtime_error("event log: write failed on " + topic);
  }
  t.records.push_back(std::move(line));
  return offset;
}

EventLog::ReadResult EventLog::read(const std::string& topic,
                                    std::uint64_t from_offset,
                                    std::size_t max_records) const {
  const Topic* t = find_topic(topic);
  if (!t) throw std::out_of_range("event log: unknown topic " + topic);
  std::shared_lock lk(t->mu);
  ReadResult out;
  out.next_offset = from_offset;
  std::uint64_t end = t->records.size();
  for (std::uint64_t off = from_offset;
       off < end && out.records.size() < max_records; ++off) {
    out.records.emplace_back(off, t->records[off]);
    out.next_offset = off + 1;
  }
  return out;
}

bool EventLog::has_topic(const std::string& topic) const {
  return find_topic(topic) != nullptr;
}

std::uint64_t EventLog::end_offset(const std::string& topic) const {
  const Topic* t = find_topic(topic);
  if (!t) return 0;
  std::shared_lock lk(t->mu);
  return t->records.size();
}

std::vector<std::string> EventLog::topics() const {
  std::shared_lock lk(topics_mu_);
  std::vector<std::string> out;
  for (const auto& [name, _] : topics_) out.push_back(name);
  return out;
}

}  // namespace flicksim
