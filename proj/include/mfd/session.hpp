#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "mfd/io.hpp"
#include "mfd/pipeline.hpp"

namespace mfd {

// In-memory editing state for one client. Mutating requests take the writer
// lock; get_weight_field and update_transforms only read.
struct Session {
  std::string id;
  SampleDomain base_domain;      // as opened, before handle samples were added
  SampleDomain domain;           // with handle samples
  std::vector<HandleSpec> specs; // real handles as requested
  std::optional<HandleLayout> layout;
  std::size_t real_count = 0;
  InsertionTrace trace;
  bool virtual_inserted = false;
  std::optional<Rig> rig;        // present once weights are computed
  bool handles_changed = false;
  bool weights_stale = true;
  std::atomic<std::size_t> recompute_count{0};
  mutable std::shared_mutex mutex;
};

// Request dispatcher for the session protocol. Requests are JSON objects with
// a "type" field; responses carry "ok": true or {"error": code, "message"}.
// An "id" field on the request is echoed back.
class SessionService {
 public:
  Json handle(const Json& request);

  std::shared_ptr<Session> find(const std::string& id) const;
  std::size_t session_count() const;
  std::size_t recompute_count(const std::string& id) const;
  std::optional<WeightField> weights_snapshot(const std::string& id) const;

 private:
  Json open_session(const Json& req);
  Json close_session(const Json& req);
  Json set_handles(const Json& req);
  Json insert_virtual(const Json& req);
  Json compute_weights(const Json& req);
  Json get_weight_field(const Json& req);
  Json update_transforms(const Json& req);
  Json add_handle(const Json& req);
  Json export_weights(const Json& req);

  std::shared_ptr<Session> session_for(const Json& req) const;
  std::string new_id();

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t counter_ = 0;
};

}  // namespace mfd
