// src/service/service.cc

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

#include "blspk/service/service.h"

#include <cstdio>
#include <random>
#include <utility>

#include "blspk/dsp/audio.h"
#include "blspk/embed/embedding.h"
#include "blspk/error.h"
#include "httplib.h"
#include "json.hpp"

namespace blspk {

namespace {

using Json = nlohmann::ordered_json;

HttpReply JsonReply(int status, const Json &j) {
  return {status, j.dump(), "application/json"};
}

HttpReply ErrorReply(int status, const std::string &code,
                     const std::string &message) {
  return JsonReply(status, Json{{"error", code}, {"message", message}});
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotWav:
    case ErrorCode::kUnsupportedFormat:
    case ErrorCode::kTooShort:
    case ErrorCode::kAllSilent:
    case ErrorCode::kZeroEmbedding:
    case ErrorCode::kEmptyInput:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidName:
    case ErrorCode::kParseError:
      return 400;
    case ErrorCode::kEmptyDb:
      return 409;
    default:
      return 500;
  }
}

HttpReply FromError(const Error &e) {
  return ErrorReply(StatusFor(e.code()), std::string(ErrorCodeName(e.code())),
                    e.what());
}

Json ScoresJson(const IdentificationResult &r) {
  Json scores = Json::object();
  for (const auto &s : r.scores) scores[s.name] = s.score;
  return scores;
}

std::optional<double> ParseCrop(const httplib::Request &req) {
  if (!req.has_param("crop")) return std::nullopt;
  const std::string text = req.get_param_value("crop");
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used != text.size() || text.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "crop '" + text + "' is not a number");
  }
  return v;
}

std::span<const std::uint8_t> BodyBytes(const std::string &body) {
  return {reinterpret_cast<const std::uint8_t *>(body.data()), body.size()};
}

void Apply(const HttpReply &reply, httplib::Response *res) {
  res->status = reply.status;
  res->set_content(reply.body, reply.content_type);
}

std::string FormatSse(const ServiceEvent &e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.type +
         "\ndata: " + e.json + "\n\n";
}

std::uint64_t ParseLastSeen(const httplib::Request &req) {
  std::string text;
  if (req.has_header("Last-Event-ID")) {
    text = req.get_header_value("Last-Event-ID");
  } else if (req.has_param("since")) {
    text = req.get_param_value("since");
  }
  if (text.empty()) return 0;
  try {
    return std::stoull(text);
  } catch (const std::exception &) {
    return 0;
  }
}

}  // namespace

IdentificationService::IdentificationService(EmbeddingNet net, SpeakerDb db,
                                             ServiceConfig cfg, Clock clock)
    : net_(std::move(net)),
      cfg_(std::move(cfg)),
      clock_(clock ? std::move(clock) : Clock(&std::chrono::steady_clock::now)),
      db_(std::move(db)) {
  if (cfg_.event_capacity == 0) {
    throw Error(ErrorCode::kInvalidArgument, "event capacity must be positive");
  }
  if (!(cfg_.pending_ttl_s > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "pending TTL must be positive");
  }
}

IdentificationService::~IdentificationService() { Stop(); }

std::string IdentificationService::AppendEvent(const std::string &type,
                                               std::string payload_json) {
  Json payload = Json::parse(payload_json);
  std::lock_guard<std::mutex> lock(event_mutex_);
  ServiceEvent e;
  e.seq = next_seq_++;
  e.timestamp = NowIso8601();
  e.type = type;
  Json full = {{"seq", e.seq}, {"timestamp", e.timestamp}, {"type", type}};
  for (auto &[k, v] : payload.items()) full[k] = v;
  e.json = full.dump();
  events_.push_back(e);
  while (events_.size() > cfg_.event_capacity) events_.pop_front();
  event_cv_.notify_all();
  return e.json;
}

void IdentificationService::ExpirePendingLocked(
    std::chrono::steady_clock::time_point now) {
  for (auto it = pending_.begin(); it != pending_.end();) {
    it = it->second.expires <= now ? pending_.erase(it) : std::next(it);
  }
}

std::string IdentificationService::NewPendingId() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[40];
  std::snprintf(buf, sizeof(buf), "p%llu-%016llx",
                static_cast<unsigned long long>(++pending_counter_),
                static_cast<unsigned long long>(rng()));
  return buf;
}

HttpReply IdentificationService::Identify(std::span<const std::uint8_t> wav,
                                          std::optional<double> crop_s) {
  if (wav.size() > cfg_.max_body_bytes) {
    return ErrorReply(413, "PayloadTooLarge", "body exceeds upload limit");
  }
  try {
    const Embedding q =
        EmbedAudio(net_, ParseWav(wav), crop_s.value_or(cfg_.crop_s));

    IdentificationResult result;
    if (cfg_.auto_update) {
      // Identify and append under one writer lock so the decision and the
      // update see the same database.
      std::unique_lock<std::shared_mutex> lock(db_mutex_);
      result = blspk::Identify(q, db_);
      if (result.known()) {
        SpeakerDb updated = db_;
        updated.Enroll(*result.speaker, q);
        if (!cfg_.db_path.empty()) SaveDb(updated, cfg_.db_path);
        db_ = std::move(updated);
      }
    } else {
      std::shared_lock<std::shared_mutex> lock(db_mutex_);
      result = blspk::Identify(q, db_);
    }

    Json body = {{"decision", result.known() ? "known" : "unknown"},
                 {"speaker", result.known() ? Json(*result.speaker) : Json()},
                 {"scores", ScoresJson(result)}};
    if (!result.known()) {
      std::lock_guard<std::mutex> lock(pending_mutex_);
      const auto now = clock_();
      ExpirePendingLocked(now);
      const std::string id = NewPendingId();
      const auto ttl = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(cfg_.pending_ttl_s));
      pending_.emplace(id, Pending{q, now + ttl});
      body["pending_id"] = id;
      body["pending_ttl_s"] = cfg_.pending_ttl_s;
    } else if (cfg_.auto_update) {
      body["auto_enrolled"] = true;
    }
    AppendEvent("identification", body.dump());
    return JsonReply(200, body);
  } catch (const Error &e) {
    HttpReply r = FromError(e);
    if (e.code() == ErrorCode::kEmptyDb) {
      r = ErrorReply(409, "EmptyDb",
                     "the speaker database is empty; enroll a speaker first "
                     "via POST /api/enroll");
    }
    return r;
  }
}

HttpReply IdentificationService::EnrollEmbedding(const std::string &name,
                                                 const Embedding &e) {
  std::size_t count = 0;
  {
    std::unique_lock<std::shared_mutex> lock(db_mutex_);
    SpeakerDb updated = db_;
    count = updated.Enroll(name, e);
    if (!cfg_.db_path.empty()) SaveDb(updated, cfg_.db_path);
    db_ = std::move(updated);
  }
  Json body = {{"speaker", name}, {"entry_count", count}};
  Json event = {{"decision", "enrolled"},
                {"speaker", name},
                {"entry_count", count},
                {"scores", Json::object()}};
  AppendEvent("enrollment", event.dump());
  return JsonReply(200, body);
}

HttpReply IdentificationService::EnrollPending(const std::string &json_body) {
  Json req;
  try {
    req = Json::parse(json_body);
  } catch (const Json::exception &e) {
    return ErrorReply(400, "ParseError", e.what());
  }
  if (!req.is_object() || !req.contains("name") || !req["name"].is_string()) {
    return ErrorReply(400, "InvalidName", "body needs a string 'name'");
  }
  const std::string name = req["name"].get<std::string>();
  if (!IsValidSpeakerName(name)) {
    return ErrorReply(400, "InvalidName", "invalid speaker name '" + name + "'");
  }
  if (!req.contains("pending_id") || !req["pending_id"].is_string()) {
    return ErrorReply(400, "InvalidArgument",
                      "send {name, pending_id} as JSON or WAV audio with ?name=");
  }
  const std::string id = req["pending_id"].get<std::string>();

  std::optional<Embedding> e;
  {
    std::lock_guard<std::mutex> lock(pending_mutex_);
    ExpirePendingLocked(clock_());
    auto it = pending_.find(id);
    if (it == pending_.end()) {
      return ErrorReply(404, "PendingNotFound",
                        "pending id '" + id + "' is unknown, expired or used");
    }
    e = it->second.embedding;
    pending_.erase(it);
  }
  try {
    return EnrollEmbedding(name, *e);
  } catch (const Error &err) {
    return FromError(err);
  }
}

HttpReply IdentificationService::EnrollAudio(const std::string &name,
                                             std::span<const std::uint8_t> wav,
                                             std::optional<double> crop_s) {
  if (wav.size() > cfg_.max_body_bytes) {
    return ErrorReply(413, "PayloadTooLarge", "body exceeds upload limit");
  }
  if (!IsValidSpeakerName(name)) {
    return ErrorReply(400, "InvalidName", "invalid speaker name '" + name + "'");
  }
  try {
    const Embedding e =
        EmbedAudio(net_, ParseWav(wav), crop_s.value_or(cfg_.crop_s));
    return EnrollEmbedding(name, e);
  } catch (const Error &err) {
    return FromError(err);
  }
}

HttpReply IdentificationService::Speakers() const {
  Json list = Json::array();
  std::shared_lock<std::shared_mutex> lock(db_mutex_);
  for (const auto &s : db_.speakers()) {
    list.push_back({{"name", s.name},
                    {"entry_count", s.entries.size()},
                    {"enrolled_at", s.entries.front().created_at}});
  }
  return JsonReply(200, list);
}

std::vector<ServiceEvent> IdentificationService::EventsAfter(
    std::uint64_t after) const {
  std::lock_guard<std::mutex> lock(event_mutex_);
  std::vector<ServiceEvent> out;
  for (const auto &e : events_) {
    if (e.seq > after) out.push_back(e);
  }
  return out;
}

std::vector<ServiceEvent> IdentificationService::WaitForEvents(
    std::uint64_t after, std::chrono::milliseconds timeout) const {
  std::unique_lock<std::mutex> lock(event_mutex_);
  event_cv_.wait_for(lock, timeout,
                     [&] { return stopping_ || next_seq_ - 1 > after; });
  std::vector<ServiceEvent> out;
  for (const auto &e : events_) {
    if (e.seq > after) out.push_back(e);
  }
  return out;
}

SpeakerDb IdentificationService::DbSnapshot() const {
  std::shared_lock<std::shared_mutex> lock(db_mutex_);
  return db_;
}

std::size_t IdentificationService::PendingCount() const {
  std::lock_guard<std::mutex> lock(pending_mutex_);
  std::size_t n = 0;
  const auto now = clock_();
  for (const auto &[id, p] : pending_) n += p.expires > now;
  return n;
}

void IdentificationService::RegisterRoutes() {
  server_ = std::make_unique<httplib::Server>();
  httplib::Server &srv = *server_;
  srv.set_payload_max_length(cfg_.max_body_bytes);
  // httplib answers oversized bodies and unknown routes itself with an
  // empty body; give those the same JSON error shape as the handlers.
  srv.set_error_handler([](const httplib::Request &, httplib::Response &res) {
    if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
    switch (res.status) {
      case 413:
        Apply(ErrorReply(413, "PayloadTooLarge", "body exceeds upload limit"), &res);
        break;
      case 404:
        Apply(ErrorReply(404, "NotFound", "no such route"), &res);
        break;
      default:
        Apply(ErrorReply(res.status, "HttpError", httplib::status_message(res.status)),
              &res);
    }
    return httplib::Server::HandlerResponse::Handled;
  });

  srv.Post("/api/identify", [this](const httplib::Request &req,
                                   httplib::Response &res) {
    try {
      Apply(Identify(BodyBytes(req.body), ParseCrop(req)), &res);
    } catch (const Error &e) {
      Apply(FromError(e), &res);
    }
  });

  srv.Post("/api/enroll", [this](const httplib::Request &req,
                                 httplib::Response &res) {
    const std::string type = req.get_header_value("Content-Type");
    try {
      if (type.rfind("application/json", 0) == 0) {
        Apply(EnrollPending(req.body), &res);
      } else {
        Apply(EnrollAudio(req.get_param_value("name"), BodyBytes(req.body),
                          ParseCrop(req)),
              &res);
      }
    } catch (const Error &e) {
      Apply(FromError(e), &res);
    }
  });

  srv.Get("/api/speakers",
          [this](const httplib::Request &, httplib::Response &res) {
            Apply(Speakers(), &res);
          });

  srv.Get("/api/events", [this](const httplib::Request &req,
                                httplib::Response &res) {
    auto last = std::make_shared<std::uint64_t>(ParseLastSeen(req));
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, last](std::size_t, httplib::DataSink &sink) {
          const auto events =
              WaitForEvents(*last, std::chrono::milliseconds(500));
          {
            std::lock_guard<std::mutex> lock(event_mutex_);
            if (stopping_) {
              sink.done();
              return true;
            }
          }
          if (events.empty()) {
            // Comment line keeps the connection alive and lets a dropped
            // client surface as a failed write.
            static const std::string kPing = ": ping\n\n";
            return sink.write(kPing.data(), kPing.size());
          }
          for (const auto &e : events) {
            const std::string chunk = FormatSse(e);
            if (!sink.write(chunk.data(), chunk.size())) return false;
            *last = e.seq;
          }
          return true;
        });
  });

  if (!cfg_.ui_dir.empty()) srv.set_mount_point("/", cfg_.ui_dir.string());
}

bool IdentificationService::Listen() {
  RegisterRoutes();
  return server_->listen(cfg_.host, cfg_.port);
}

int IdentificationService::BindToAnyPort() {
  RegisterRoutes();
  return server_->bind_to_any_port(cfg_.host);
}

bool IdentificationService::ListenAfterBind() {
  return server_->listen_after_bind();
}

void IdentificationService::Stop() {
  {
    std::lock_guard<std::mutex> lock(event_mutex_);
    stopping_ = true;
  }
  event_cv_.notify_all();
  if (server_) server_->stop();
}

}  // namespace blspk
