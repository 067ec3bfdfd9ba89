#pragma once

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "monitord/bundle.hpp"

namespace monitord {

// One entry in the run trace. `observable` marks events an app or user could
// see (installs, deliveries, reads); internal entries carry framework
// bookkeeping (hook dispatches, module event deliveries, IRM table changes)
// and are excluded from trace-equivalence comparisons.
struct TraceEvent {
  std::uint64_t seq;
  std::string kind;
  bool observable;
  Bundle fields;
};

class TraceRecorder {
 public:
  std::uint64_t record(std::string kind, bool observable, Bundle fields = {}) {
    std::lock_guard<std::mutex> lk(mu_);
    std::uint64_t seq = next_++;
    events_.push_back({seq, std::move(kind), observable, std::move(fields)});
    return seq;
  }

  std::vector<TraceEvent> snapshot() const {
    std::lock_guard<std::mutex> lk(mu_);
    return events_;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lk(mu_);
    return events_.size();
  }

  void clear() {
    std::lock_guard<std::mutex> lk(mu_);
    events_.clear();
    next_ = 0;
  }

  // Observable entries only, seq stripped; the comparison key for
  // default-allow equivalence.
  nlohmann::ordered_json observable_fingerprint() const {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : snapshot()) {
      if (!e.observable) continue;
      nlohmann::ordered_json item;
      item["kind"] = e.kind;
      item["fields"] = e.fields.to_plain_json();
      arr.push_back(item);
    }
    return arr;
  }

 private:
  mutable std::mutex mu_;
  std::vector<TraceEvent> events_;
  std::uint64_t next_ = 0;
};

}  // namespace monitord
