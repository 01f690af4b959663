#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace finsearch {

// One execution event. `seq` is the authoritative total order (appended
// under the log's lock); t_wall is wall-clock seconds for humans and the
// benchmark timer.
struct Event {
  std::uint64_t seq = 0;
  std::string event;
  std::string node_id;
  double t_wall = 0.0;
  nlohmann::json detail;
};

// Thread-safe append-only event log emitted by the executor. Serializes to
// JSON lines for trace-based tests and offline inspection.
class EventLog {
 public:
  void emit(std::string event, std::string node_id,
            nlohmann::json detail = nlohmann::json::object()) {
    const double now =
        std::chrono::duration<double>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    std::lock_guard lock(mu_);
    events_.push_back({next_seq_++, std::move(event), std::move(node_id), now,
                       std::move(detail)});
  }

  std::vector<Event> snapshot() const {
    std::lock_guard lock(mu_);
    return events_;
  }

  // First sequence number of a matching event, if any. node_id empty = any.
  std::optional<std::uint64_t> first_seq(const std::string& event,
                                         const std::string& node_id = "") const {
    std::lock_guard lock(mu_);
    for (const auto& e : events_) {
      if (e.event == event && (node_id.empty() || e.node_id == node_id)) {
        return e.seq;
      }
    }
    return std::nullopt;
  }

  std::size_t count(const std::string& event) const {
    std::lock_guard lock(mu_);
    std::size_t n = 0;
    for (const auto& e : events_) n += (e.event == event);
    return n;
  }

  std::string to_jsonl() const {
    std::lock_guard lock(mu_);
    std::ostringstream ss;
    for (const auto& e : events_) {
      nlohmann::json j;
      j["seq"] = e.seq;
      j["event"] = e.event;
      j["node_id"] = e.node_id;
      j["t_wall"] = e.t_wall;
      j["detail"] = e.detail;
      ss << j.dump() << "\n";
    }
    return ss.str();
  }

 private:
  mutable std::mutex mu_;
  std::vector<Event> events_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace finsearch
