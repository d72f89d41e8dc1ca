#pragma once

#include <cstdint>
#include <vector>

#include "forkjoin/path.hpp"

namespace forkjoin {

// One simulation event as recorded in the optional event log.
struct EventRecord {
  double time = 0;
  char kind = 'a';          // 'a' external arrival, 'c' service completion
  int id = 0;               // job type id for arrivals, server id for completions
  int activity = 0;         // completed activity (0 for arrivals)
  std::uint64_t job = 0;    // id of the job that arrived or completed
};

// Sample paths recorded during a run. queue[k] is the queue-length path of
// buffer k (empty when not recorded); server_activity[s] holds the activity
// id the server is working on (0 when idle). Index 0 of each vector is
// unused so ids can be used directly.
struct Trace {
  double horizon = 0;
  std::vector<Path> queue;
  std::vector<Path> server_activity;
  std::vector<EventRecord> events;

  bool has_queue(int buffer) const {
    return buffer < static_cast<int>(queue.size()) && !queue[buffer].empty();
  }
  bool has_server_activity(int server) const {
    return server < static_cast<int>(server_activity.size()) &&
           !server_activity[server].empty();
  }
};

}  // namespace forkjoin
