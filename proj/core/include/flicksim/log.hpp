#pragma once

#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

namespace flicksim {

// Append-only, topic-partitioned log with contiguous offsets from 0.
// Records are immutable once appended. When constructed with a directory,
// every record is mirrored to "<dir>/<topic>.log", one line per record.
class EventLog {
 public:
  struct ReadResult {
    std::vector<std::pair<std::uint64_t, std::string>> records;
    std::uint64_t next_offset = 0;
  };

  // dir empty = in-memory only. flush_every_append forces a stream flush per
  // record (durability over throughput); off by default.
  explicit EventLog(std::string dir = "", bool flush_every_append = false);

  // Auto-creates the topic. Returns the record's offset.
  std::uint64_t append(const std::string& topic, std::string line);

  // Up to max_records starting at from_offset, in offset order. Reading at or
  // past the end returns an empty batch with next_offset == from_offset.
  // Throws std::out_of_range for an unknown topic.
  ReadResult read(const std::string& topic, std::uint64_t from_offset,
                  std::size_t max_records) const;

  bool has_topic(const std::string& topic) const;
  std::uint64_t end_offset(const std::string& topic) const;  // 0 if unknown
  std::vector<std::string> topics() const;

 private:
  struct Topic {
    mutable std::shared_mutex mu;
    std::deque<std::string> records;
    std::ofstream file;
  };

  Topic& topic_for_append(const std::string& name);
  const Topic* find_topic(const std::string& name) const;

  std::string dir_;
  bool flush_;
  mutable std::shared_mutex topics_mu_;
  std::map<std::string, std::unique_ptr<Topic>> topics_;
};

}  // namespace flicksim
