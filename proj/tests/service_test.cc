// tests/service_test.cc

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

#include <gtest/gtest.h>

#include <atomic>
#include <random>
#include <thread>

#include "blspk/dsp/audio.h"
#include "blspk/embed/embedding.h"
#include "blspk/eval/synth.h"
#include "blspk/service/service.h"
#include "httplib.h"
#include "json.hpp"
#include "test_util.h"

namespace blspk {
namespace {

using nlohmann::json;
using testing::TempDir;

EmbeddingNet SmallNet() {
  EmbeddingNet net(FeatureKind::kSpecdB, FeatureDim(FeatureKind::kSpecdB), 16, 1);
  std::mt19937_64 rng(8);
  InitializeNet(&net, &rng);
  return net;
}

struct Fixture {
  Corpus corpus = MakeSynthCorpus(2, 2, 6).corpus;
  EmbeddingNet net = SmallNet();

  const AudioSegment &Utt(int s, int u) const {
    return corpus.speakers[s].utterances[u];
  }
  std::vector<std::uint8_t> Wav(int s, int u) const { return EncodeWav(Utt(s, u)); }
  // Embeds what the service sees: the 16-bit WAV round trip.
  Embedding Embed(int s, int u) const {
    return EmbedAudio(net, ParseWav(Wav(s, u)), 0.5);
  }
};

const Fixture &F() {
  static const Fixture f;
  return f;
}

// Database where the query (speaker 0, utterance 0) scores +1 against "ana".
SpeakerDb KnownDb() {
  SpeakerDb db;
  db.Enroll("ana", F().Embed(0, 0), "2024-01-01T00:00:00Z");
  return db;
}

// Database where the same query scores -1 against "neg".
SpeakerDb UnknownDb() {
  SpeakerDb db;
  db.Enroll("neg", F().Embed(0, 0).Negated(), "2024-01-01T00:00:00Z");
  return db;
}

TEST(ServiceHandlersTest, IdentifyKnown) {
  IdentificationService svc(F().net, KnownDb(), {});
  const auto wav = F().Wav(0, 0);
  const HttpReply r = svc.Identify(wav);
  ASSERT_EQ(r.status, 200) << r.body;
  const json j = json::parse(r.body);
  EXPECT_EQ(j["decision"], "known");
  EXPECT_EQ(j["speaker"], "ana");
  EXPECT_NEAR(j["scores"]["ana"].get<double>(), 1.0, 1e-5);
  EXPECT_FALSE(j.contains("pending_id"));
  // Without auto-update the database is untouched.
  EXPECT_TRUE(svc.DbSnapshot() == KnownDb());
  EXPECT_EQ(svc.PendingCount(), 0u);
}

TEST(ServiceHandlersTest, IdentifyUnknownCreatesPending) {
  IdentificationService svc(F().net, UnknownDb(), {});
  const auto wav = F().Wav(0, 0);
  const json j = json::parse(svc.Identify(wav).body);
  EXPECT_EQ(j["decision"], "unknown");
  EXPECT_TRUE(j["speaker"].is_null());
  EXPECT_NEAR(j["scores"]["neg"].get<double>(), -1.0, 1e-5);
  ASSERT_TRUE(j["pending_id"].is_string());
  EXPECT_EQ(j["pending_ttl_s"], 300.0);
  EXPECT_EQ(svc.PendingCount(), 1u);

  const HttpReply enrolled = svc.EnrollPending(
      json{{"name", "bob"}, {"pending_id", j["pending_id"]}}.dump());
  ASSERT_EQ(enrolled.status, 200) << enrolled.body;
  EXPECT_EQ(json::parse(enrolled.body)["entry_count"], 1);
  EXPECT_EQ(svc.DbSnapshot().Find("bob")->entries.size(), 1u);
  // The pending embedding is the query embedding.
  EXPECT_EQ(svc.DbSnapshot().Find("bob")->entries[0].embedding, F().Embed(0, 0));

  const HttpReply again = svc.EnrollPending(
      json{{"name", "bob"}, {"pending_id", j["pending_id"]}}.dump());
  EXPECT_EQ(again.status, 404);
  EXPECT_EQ(json::parse(again.body)["error"], "PendingNotFound");
  EXPECT_EQ(svc.PendingCount(), 0u);
}

TEST(ServiceHandlersTest, PendingExpires) {
  auto now = std::make_shared<std::chrono::steady_clock::time_point>();
  ServiceConfig cfg;
  cfg.pending_ttl_s = 10;
  IdentificationService svc(F().net, UnknownDb(), cfg, [now] { return *now; });
  const auto wav = F().Wav(0, 0);
  const std::string id1 = json::parse(svc.Identify(wav).body)["pending_id"];
  const std::string id2 = json::parse(svc.Identify(wav).body)["pending_id"];
  EXPECT_NE(id1, id2);
  *now += std::chrono::seconds(9);
  EXPECT_EQ(svc.PendingCount(), 2u);
  EXPECT_EQ(svc.EnrollPending(json{{"name", "x"}, {"pending_id", id1}}.dump()).status,
            200);
  *now += std::chrono::seconds(2);
  EXPECT_EQ(svc.PendingCount(), 0u);
  EXPECT_EQ(svc.EnrollPending(json{{"name", "x"}, {"pending_id", id2}}.dump()).status,
            404);
}

TEST(ServiceHandlersTest, EnrollPendingValidation) {
  IdentificationService svc(F().net, UnknownDb(), {});
  const auto wav = F().Wav(0, 0);
  const std::string id = json::parse(svc.Identify(wav).body)["pending_id"];
  EXPECT_EQ(svc.EnrollPending("{oops").status, 400);
  const HttpReply bad_name =
      svc.EnrollPending(json{{"name", " "}, {"pending_id", id}}.dump());
  EXPECT_EQ(bad_name.status, 400);
  EXPECT_EQ(json::parse(bad_name.body)["error"], "InvalidName");
  EXPECT_EQ(svc.EnrollPending(json{{"pending_id", id}}.dump()).status, 400);
  EXPECT_EQ(svc.EnrollPending(json{{"name", "ok"}}.dump()).status, 400);
  // A rejected name does not consume the pending entry.
  EXPECT_EQ(svc.EnrollPending(json{{"name", "ok"}, {"pending_id", id}}.dump()).status,
            200);
}

TEST(ServiceHandlersTest, EnrollAudioIncrements) {
  TempDir dir;
  ServiceConfig cfg;
  cfg.db_path = dir / "db.json";
  IdentificationService svc(F().net, SpeakerDb{}, cfg);
  for (int u = 0; u < 2; ++u) {
    const HttpReply r = svc.EnrollAudio("carol", F().Wav(1, u));
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(json::parse(r.body)["entry_count"], u + 1);
  }
  EXPECT_EQ(svc.EnrollAudio("", F().Wav(1, 0)).status, 400);
  EXPECT_TRUE(LoadDb(cfg.db_path) == svc.DbSnapshot());

  const json speakers = json::parse(svc.Speakers().body);
  ASSERT_EQ(speakers.size(), 1u);
  EXPECT_EQ(speakers[0]["name"], "carol");
  EXPECT_EQ(speakers[0]["entry_count"], 2);
  EXPECT_EQ(speakers[0]["enrolled_at"],
            LoadDb(cfg.db_path).Find("carol")->entries[0].created_at);
}

TEST(ServiceHandlersTest, ErrorStatuses) {
  IdentificationService empty(F().net, SpeakerDb{}, {});
  const auto wav = F().Wav(0, 0);
  const HttpReply r409 = empty.Identify(wav);
  EXPECT_EQ(r409.status, 409);
  EXPECT_EQ(json::parse(r409.body)["error"], "EmptyDb");
  EXPECT_NE(json::parse(r409.body)["message"].get<std::string>().find("enroll"),
            std::string::npos);

  IdentificationService svc(F().net, KnownDb(), {});
  const std::vector<std::uint8_t> truncated(wav.begin(), wav.begin() + 30);
  const HttpReply r400 = svc.Identify(truncated);
  EXPECT_EQ(r400.status, 400);
  EXPECT_EQ(json::parse(r400.body)["error"], "NotWav");
  const auto short_wav = EncodeWav(testing::SineSegment(300, 0.1));
  EXPECT_EQ(json::parse(svc.Identify(short_wav).body)["error"], "TooShort");
  const auto silent = EncodeWav(AudioSegment(std::vector<float>(16000, 0.0f)));
  EXPECT_EQ(json::parse(svc.Identify(silent).body)["error"], "AllSilent");

  ServiceConfig small;
  small.max_body_bytes = 1000;
  IdentificationService limited(F().net, KnownDb(), small);
  EXPECT_EQ(limited.Identify(wav).status, 413);
  EXPECT_EQ(limited.EnrollAudio("x", wav).status, 413);
}

TEST(ServiceHandlersTest, AutoUpdateAppendsOnKnown) {
  ServiceConfig cfg;
  cfg.auto_update = true;
  IdentificationService svc(F().net, KnownDb(), cfg);
  const auto wav = F().Wav(0, 0);
  const json j = json::parse(svc.Identify(wav).body);
  EXPECT_EQ(j["auto_enrolled"], true);
  EXPECT_EQ(svc.DbSnapshot().Find("ana")->entries.size(), 2u);
}

TEST(ServiceEventsTest, OneEventPerRequestWithIncreasingSeq) {
  ServiceConfig cfg;
  cfg.event_capacity = 3;
  IdentificationService svc(F().net, UnknownDb(), cfg);
  const auto wav = F().Wav(0, 0);
  for (int i = 0; i < 5; ++i) svc.Identify(wav);
  svc.EnrollAudio("dan", wav);
  const auto events = svc.EventsAfter(0);
  ASSERT_EQ(events.size(), 3u);  // bounded log keeps the newest
  EXPECT_EQ(events.front().seq, 4u);
  for (std::size_t i = 1; i < events.size(); ++i) {
    EXPECT_EQ(events[i].seq, events[i - 1].seq + 1);
  }
  EXPECT_EQ(events.back().type, "enrollment");
  const json last = json::parse(events.back().json);
  EXPECT_EQ(last["seq"], 6);
  EXPECT_EQ(last["decision"], "enrolled");
  EXPECT_EQ(last["speaker"], "dan");
  const json first = json::parse(events.front().json);
  EXPECT_EQ(first["type"], "identification");
  EXPECT_EQ(first["decision"], "unknown");
  EXPECT_TRUE(first.contains("timestamp"));

  EXPECT_EQ(svc.EventsAfter(5).size(), 1u);
  EXPECT_TRUE(svc.EventsAfter(6).empty());
  EXPECT_TRUE(svc.WaitForEvents(6, std::chrono::milliseconds(10)).empty());
}

class ServiceHttpTest : public ::testing::Test {
 protected:
  void Start(SpeakerDb db, ServiceConfig cfg = {}) {
    cfg.host = "127.0.0.1";
    svc_ = std::make_unique<IdentificationService>(F().net, std::move(db), cfg);
    port_ = svc_->BindToAnyPort();
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { svc_->ListenAfterBind(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(10, 0);
  }
  void TearDown() override {
    if (svc_) svc_->Stop();
    if (thread_.joinable()) thread_.join();
  }
  httplib::Result PostWav(const std::string &path, const std::vector<std::uint8_t> &wav) {
    return client_->Post(path, reinterpret_cast<const char *>(wav.data()), wav.size(),
                         "audio/wav");
  }

  std::unique_ptr<IdentificationService> svc_;
  std::unique_ptr<httplib::Client> client_;
  std::thread thread_;
  int port_ = -1;
};

TEST_F(ServiceHttpTest, IdentifyEnrollAndSpeakers) {
  Start(UnknownDb());
  const auto wav = F().Wav(0, 0);
  auto res = PostWav("/api/identify", wav);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const json j = json::parse(res->body);
  EXPECT_EQ(j["decision"], "unknown");

  res = client_->Post("/api/enroll",
                      json{{"name", "eve"}, {"pending_id", j["pending_id"]}}.dump(),
                      "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200) << res->body;

  res = PostWav("/api/identify", wav);
  EXPECT_EQ(json::parse(res->body)["speaker"], "eve");

  res = PostWav("/api/enroll?name=eve", F().Wav(0, 1));
  EXPECT_EQ(json::parse(res->body)["entry_count"], 2);

  res = client_->Get("/api/speakers");
  ASSERT_TRUE(res);
  const json list = json::parse(res->body);
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(list[1]["name"], "eve");
  EXPECT_EQ(list[1]["entry_count"], 2);

  res = PostWav("/api/identify?crop=1.0", wav);
  EXPECT_EQ(res->status, 200);
}

TEST_F(ServiceHttpTest, ErrorStatusesOverHttp) {
  ServiceConfig cfg;
  cfg.max_body_bytes = 40000;
  Start(SpeakerDb{}, cfg);
  const auto wav = F().Wav(0, 0);
  const std::vector<std::uint8_t> small(wav.begin(), wav.begin() + 200);
  auto res = PostWav("/api/identify", small);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  EXPECT_EQ(json::parse(res->body)["error"], "NotWav");

  res = PostWav("/api/identify", EncodeWav(F().Utt(0, 0).Head(16000)));
  EXPECT_EQ(res->status, 409);

  res = PostWav("/api/identify", wav);
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 413);
  EXPECT_EQ(json::parse(res->body)["error"], "PayloadTooLarge");

  res = client_->Post("/api/enroll", "{}", "application/json");
  EXPECT_EQ(res->status, 400);

  res = client_->Get("/api/nope");
  EXPECT_EQ(res->status, 404);
  EXPECT_EQ(json::parse(res->body)["error"], "NotFound");
}

TEST_F(ServiceHttpTest, EventStreamDeliversAndReplays) {
  Start(UnknownDb());
  const auto wav = F().Wav(0, 0);
  for (int i = 0; i < 3; ++i) ASSERT_EQ(PostWav("/api/identify", wav)->status, 200);

  auto read_events = [&](httplib::Headers headers, std::size_t want) {
    std::string buffer;
    std::vector<std::uint64_t> ids;
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(5, 0);
    c.Get("/api/events", headers, [&](const char *data, std::size_t n) {
      buffer.append(data, n);
      std::size_t pos;
      while ((pos = buffer.find("\n\n")) != std::string::npos) {
        const std::string msg = buffer.substr(0, pos);
        buffer.erase(0, pos + 2);
        if (msg.rfind("id: ", 0) == 0) {
          ids.push_back(std::stoull(msg.substr(4)));
          EXPECT_NE(msg.find("\nevent: identification\ndata: {"), std::string::npos);
        }
      }
      return ids.size() < want;
    });
    return ids;
  };

  EXPECT_EQ(read_events({}, 3), (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(read_events({{"Last-Event-ID", "1"}}, 2),
            (std::vector<std::uint64_t>{2, 3}));

  // A live subscriber sees an event posted after it connected.
  std::vector<std::uint64_t> live;
  std::thread sub([&] { live = read_events({{"Last-Event-ID", "3"}}, 1); });
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  ASSERT_EQ(PostWav("/api/identify", wav)->status, 200);
  sub.join();
  EXPECT_EQ(live, (std::vector<std::uint64_t>{4}));
}

}  // namespace
}  // namespace blspk
