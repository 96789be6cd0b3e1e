// include/blspk/service/service.h

// Copyright 2026   The blspk Authors

// See the LICENSE file at the repository root
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef BLSPK_SERVICE_SERVICE_H_
#define BLSPK_SERVICE_SERVICE_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "blspk/identify/speaker_db.h"
#include "blspk/net/blstm.h"

namespace httplib {
class Server;
}

namespace blspk {

struct ServiceConfig {
  std::string host = "0.0.0.0";
  int port = 8080;
  std::filesystem::path db_path;  // empty: in-memory only
  bool auto_update = false;
  double pending_ttl_s = 300;
  double crop_s = 0.5;
  std::size_t event_capacity = 1000;
  std::size_t max_body_bytes = 10 * 1024 * 1024;
  std::filesystem::path ui_dir;  // static files mounted at "/" when set
};

struct ServiceEvent {
  std::uint64_t seq = 0;
  std::string timestamp;
  std::string type;  // "identification" or "enrollment"
  std::string json;  // full event payload, includes seq/timestamp/type
};

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// The online identification loop behind the HTTP API. Handlers are plain
// member functions so they can be exercised without a socket; Listen()
// binds them to routes.
//
// Concurrency: identify requests read the database under a shared lock;
// enrollments serialize under the exclusive lock and persist the database
// (temp file + rename) before releasing it. Event sequence numbers are
// assigned under the event mutex and strictly increase.
class IdentificationService {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  IdentificationService(EmbeddingNet net, SpeakerDb db, ServiceConfig cfg,
                        Clock clock = {});
  ~IdentificationService();

  IdentificationService(const IdentificationService &) = delete;
  IdentificationService &operator=(const IdentificationService &) = delete;

  // POST /api/identify. `crop_s` overrides the configured crop.
  HttpReply Identify(std::span<const std::uint8_t> wav,
                     std::optional<double> crop_s = std::nullopt);

  // POST /api/enroll with {"name", "pending_id"}.
  HttpReply EnrollPending(const std::string &json_body);
  // POST /api/enroll with WAV bytes and ?name=.
  HttpReply EnrollAudio(const std::string &name,
                        std::span<const std::uint8_t> wav,
                        std::optional<double> crop_s = std::nullopt);

  // GET /api/speakers
  HttpReply Speakers() const;

  // Retained events with seq > after, oldest first.
  std::vector<ServiceEvent> EventsAfter(std::uint64_t after) const;
  // Blocks until an event newer than `after` exists, the timeout passes or
  // the service stops.
  std::vector<ServiceEvent> WaitForEvents(std::uint64_t after,
                                          std::chrono::milliseconds timeout) const;

  SpeakerDb DbSnapshot() const;
  std::size_t PendingCount() const;

  // Binds routes and blocks serving until Stop(). Returns false if the
  // socket could not be bound.
  bool Listen();
  // Binds to an ephemeral port (for tests); returns the port or -1.
  int BindToAnyPort();
  // Serves on a socket bound by BindToAnyPort; blocks until Stop().
  bool ListenAfterBind();
  void Stop();

 private:
  struct Pending {
    Embedding embedding;
    std::chrono::steady_clock::time_point expires;
  };

  std::string AppendEvent(const std::string &type, std::string payload_json);
  void ExpirePendingLocked(std::chrono::steady_clock::time_point now);
  std::string NewPendingId();
  HttpReply EnrollEmbedding(const std::string &name, const Embedding &e);
  void RegisterRoutes();

  const EmbeddingNet net_;
  const ServiceConfig cfg_;
  Clock clock_;

  mutable std::shared_mutex db_mutex_;
  SpeakerDb db_;

  mutable std::mutex pending_mutex_;
  std::map<std::string, Pending> pending_;
  std::uint64_t pending_counter_ = 0;

  mutable std::mutex event_mutex_;
  mutable std::condition_variable event_cv_;
  std::deque<ServiceEvent> events_;
  std::uint64_t next_seq_ = 1;
  bool stopping_ = false;

  std::unique_ptr<httplib::Server> server_;
};

}  // namespace blspk

#endif  // BLSPK_SERVICE_SERVICE_H_
