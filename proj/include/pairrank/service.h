// Copyright 2026 The PairRank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Annotation service: hosts lexica and judgment sessions for human
// annotators.
//
// AnnotationService holds all state and answers requests as (status, JSON)
// pairs; RegisterRoutes binds it to an httplib server. With a data directory
// every state change is written before it is acknowledged:
//
//   lexicons/<id>.json  uploaded lexica (immutable once stored)
//   events.jsonl        session creation and abandonment, direct grades
//   judgments.csv       comparison log with session and idempotency_key
//                       columns
//
// On start the directory is replayed, which rebuilds every session exactly:
// sessions are deterministic given their recorded seed and judgments.

#ifndef PAIRRANK_SERVICE_H_
#define PAIRRANK_SERVICE_H_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pairrank/adaptive.h"
#include "pairrank/error.h"
#include "pairrank/estimate_joint.h"
#include "pairrank/estimate_single.h"
#include "pairrank/io.h"
#include "pairrank/model.h"
#include "pairrank/random.h"

// After Eigen: the resolver headers pulled in here define a macro that
// collides with Eigen identifiers.
#include <httplib.h>

namespace pairrank::service {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSchemaHeader = "X-Pairrank-Schema";
inline constexpr int kDefaultFolds = 2;
inline constexpr int kDefaultJitter = 1;

struct Response {
  int status = 200;
  json body;
  // Sent verbatim instead of `body` when set.
  std::optional<std::string> raw;
};

inline Response ErrorResponse(int status, std::string message, json extra = json::object()) {
  extra["error"] = std::move(message);
  return {status, std::move(extra), std::nullopt};
}

struct ServiceOptions {
  std::filesystem::path data_dir;  // empty: nothing is persisted
  std::uint64_t seed = 0;
};

enum class SessionKind { kInsertion, kRoundRobin };
enum class SessionStatus { kActive, kComplete, kAbandoned };

inline std::string_view SessionKindName(SessionKind kind) {
  return kind == SessionKind::kInsertion ? "insertion" : "round_robin";
}

inline std::string_view SessionStatusName(SessionStatus status) {
  switch (status) {
    case SessionStatus::kActive: return "active";
    case SessionStatus::kComplete: return "complete";
    case SessionStatus::kAbandoned: return "abandoned";
  }
  return "active";
}

// Six-decimal value as served; identical to what the lexicon file stores.
inline double WireScore(double value) { return std::strtod(FormatFixed(value).c_str(), nullptr); }

inline std::string UtcNow() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Session {
  std::mutex mu;
  std::string id;
  SessionKind kind = SessionKind::kInsertion;
  std::string lexicon_id;
  std::string annotator;
  SessionStatus status = SessionStatus::kActive;
  std::uint64_t seed = 0;
  Distribution distribution;
  DrawWidth draw_width;

  // Insertion sessions.
  std::string word;
  int m = kDefaultComparisons;
  int folds = kDefaultFolds;
  int jitter = kDefaultJitter;
  std::optional<InsertionSession> insertion;
  std::optional<SingleEstimate> estimate;

  // Round-robin sessions: this annotator's share of the shuffled pair list.
  int part = 0;
  int parts = 1;
  std::vector<std::pair<std::string, std::string>> queue;
  std::size_t position = 0;

  // Responses of accepted judgments by idempotency key.
  std::map<std::string, json> replies;

  std::pair<std::string, std::string> CurrentPair() const {
    if (kind == SessionKind::kInsertion) return {word, insertion->NextAnchor().item};
    return queue[position];
  }

  json Progress() const {
    if (kind == SessionKind::kInsertion) {
      return {{"done", insertion->comparisons_used()}, {"total", insertion->budget()}};
    }
    return {{"done", position}, {"total", queue.size()}};
  }

  void Apply(PairOutcome outcome) {
    if (kind == SessionKind::kInsertion) {
      insertion->RecordOutcome(insertion->NextQuery(), FirstOutcome(outcome));
      if (insertion->phase() == Phase::kDone) {
        estimate = insertion->Finalize(distribution, draw_width, SingleMethod::kMoments);
        status = SessionStatus::kComplete;
      }
      return;
    }
    if (++position >= queue.size()) status = SessionStatus::kComplete;
  }

  json EstimateJson() const {
    return {{"score", WireScore(estimate->rating)},
            {"method", SingleMethodName(estimate->method)},
            {"boundary_flag", BoundaryName(estimate->at_boundary)},
            {"comparisons_used", insertion->comparisons_used()}};
  }

  json Summary() const {
    json out{{"id", id},
             {"kind", SessionKindName(kind)},
             {"lexicon", lexicon_id},
             {"status", SessionStatusName(status)},
             {"annotator", annotator},
             {"progress", Progress()}};
    if (kind == SessionKind::kInsertion) {
      out["word"] = word;
      out["m"] = m;
      out["folds"] = folds;
      out["jitter"] = jitter;
      if (status == SessionStatus::kActive) {
        out["phase"] = PhaseName(insertion->phase());
        out["fold"] = insertion->fold();
      }
      if (estimate) out["estimate"] = EstimateJson();
    } else {
      out["part"] = part;
      out["parts"] = parts;
    }
    return out;
  }
};

// Every unordered pair of `words`, `folds` times, shuffled with random
// orientation.
inline std::vector<std::pair<std::string, std::string>> RoundRobinPairs(
    const std::vector<std::string>& words, int folds, std::uint64_t seed) {
  std::vector<std::pair<std::string, std::string>> pairs;
  auto rng = StreamFor(seed, {0});
  std::bernoulli_distribution flip(0.5);
  for (int f = 0; f < folds; ++f) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      for (std::size_t j = i + 1; j < words.size(); ++j) {
        if (flip(rng)) pairs.emplace_back(words[j], words[i]); else pairs.emplace_back(words[i], words[j]);
      }
    }
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  return pairs;
}

class AnnotationService {
 public:
  explicit AnnotationService(ServiceOptions options = {}) : options_(std::move(options)) {
    if (!options_.data_dir.empty()) {
      std::filesystem::create_directories(options_.data_dir / "lexicons");
      Replay();
      events_ = std::make_unique<JsonLineLog>(options_.data_dir / "events.jsonl");
      judgments_ = std::make_unique<ComparisonLog>(options_.data_dir / "judgments.csv",
                                                   std::vector<std::string>{"session", "idempotency_key"});
    }
  }

  // --- Lexica ---------------------------------------------------------------

  Response CreateLexicon(std::string_view body) {
    Lexicon lexicon;
    try {
      lexicon = ParseLexicon(body);
    } catch (const Error& e) {
      return ErrorResponse(e.code() == ErrorCode::kDuplicateWord ? 409 : 422, e.detail());
    }
    std::lock_guard<std::mutex> lock(mu_);
    const std::string id = "lex" + std::to_string(++lexicon_counter_);
    if (!options_.data_dir.empty()) WriteLexiconFile(LexiconPath(id), lexicon);
    lexicons_[id] = std::make_shared<const Lexicon>(std::move(lexicon));
    return {201, LexiconSummary(id, *lexicons_[id]), std::nullopt};
  }

  Response ListLexicons() const {
    std::lock_guard<std::mutex> lock(mu_);
    json list = json::array();
    for (const auto& [id, lex] : lexicons_) list.push_back(LexiconSummary(id, *lex));
    return {200, {{"lexicons", list}}, std::nullopt};
  }

  Response GetLexicon(const std::string& id) const {
    const auto lex = FindLexicon(id);
    if (!lex) return ErrorResponse(404, "unknown lexicon '" + id + "'");
    return {200, json(), FormatLexicon(*lex)};
  }

  // Entries by descending score (ties by word).
  Response GetScores(const std::string& id) const {
    const auto lex = FindLexicon(id);
    if (!lex) return ErrorResponse(404, "unknown lexicon '" + id + "'");
    std::vector<const LexiconEntry*> order;
    for (const auto& e : lex->entries) order.push_back(&e);
    std::sort(order.begin(), order.end(), [](auto a, auto b) {
      const double sa = WireScore(a->score), sb = WireScore(b->score);
      return sa != sb ? sa > sb : a->word < b->word;
    });
    json scores = json::array();
    for (const auto* e : order) {
      json entry{{"word", e->word}, {"score", WireScore(e->score)}};
      if (e->bootstrap_sd) entry["bootstrap_sd"] = WireScore(*e->bootstrap_sd);
      scores.push_back(entry);
    }
    return {200, {{"lexicon", id}, {"scores", scores}}, std::nullopt};
  }

  // --- Direct grades --------------------------------------------------------

  Response PostGrade(const std::string& lexicon_id, std::string_view body) {
    const auto lex = FindLexicon(lexicon_id);
    if (!lex) return ErrorResponse(404, "unknown lexicon '" + lexicon_id + "'");
    json request;
    if (!ParseBody(body, request)) return ErrorResponse(400, "body is not a JSON object");
    if (!request.contains("word") || !request["word"].is_string()) return ErrorResponse(422, "missing 'word'");
    if (!request.contains("grade") || !request["grade"].is_string()) {
      return ErrorResponse(422, "missing 'grade'");
    }
    DirectGrade grade;
    grade.word = request["word"].get<std::string>();
    grade.annotator = request.value("annotator", std::string());
    try {
      grade.grade = ParseGrade(request["grade"].get<std::string>());
    } catch (const Error& e) {
      return ErrorResponse(422, e.detail());
    }
    const LexiconEntry* entry = lex->Find(grade.word);
    if (!entry) return ErrorResponse(422, "'" + grade.word + "' is not in lexicon " + lexicon_id);
    grade.word = entry->word;
    std::lock_guard<std::mutex> lock(mu_);
    if (events_) {
      events_->Append({{"event", "grade"},
                       {"lexicon", lexicon_id},
                       {"word", grade.word},
                       {"annotator", grade.annotator},
                       {"grade", GradeName(grade.grade)}});
    }
    grades_[lexicon_id].push_back(grade);
    return {201, {{"word", grade.word}, {"grade", GradeName(grade.grade)}, {"value", GradeValue(grade.grade)}},
            std::nullopt};
  }

  // Per-word averages of the direct grades and the origin shift they imply.
  Response GetGrades(const std::string& lexicon_id) const {
    const auto lex = FindLexicon(lexicon_id);
    if (!lex) return ErrorResponse(404, "unknown lexicon '" + lexicon_id + "'");
    std::vector<DirectGrade> grades;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto it = grades_.find(lexicon_id);
      if (it != grades_.end()) grades = it->second;
    }
    std::map<std::string, int> counts;
    for (const auto& g : grades) ++counts[g.word];
    const std::vector<DirectScore> averages = AverageDirectGrades(grades);
    json words = json::array();
    for (const auto& d : averages) {
      words.push_back({{"word", d.item}, {"mean", d.value}, {"count", counts[d.item]}});
    }
    json out{{"lexicon", lexicon_id}, {"words", words}};
    if (!averages.empty()) {
      std::unordered_map<std::string, double> ratings;
      for (const auto& e : lex->entries) ratings[e.word] = e.score;
      const OriginCalibration cal = CalibrateOrigin(ratings, averages);
      out["calibration"] = {{"shift", cal.shift}, {"squared_error", cal.squared_error}};
    }
    return {200, out, std::nullopt};
  }

  // --- Sessions -------------------------------------------------------------

  Response CreateInsertionSession(const std::string& lexicon_id, std::string_view body) {
    const auto lex = FindLexicon(lexicon_id);
    if (!lex) return ErrorResponse(404, "unknown lexicon '" + lexicon_id + "'");
    json request;
    if (!ParseBody(body, request)) return ErrorResponse(400, "body is not a JSON object");
    if (!request.contains("word") || !request["word"].is_string() || request["word"].get<std::string>().empty()) {
      return ErrorResponse(422, "missing 'word'");
    }
    json event{{"event", "create"},
               {"kind", "insertion"},
               {"lexicon", lexicon_id},
               {"word", request["word"].get<std::string>()},
               {"annotator", request.value("annotator", std::string())}};
    for (const auto& [key, fallback] : {std::pair{"m", kDefaultComparisons}, std::pair{"folds", kDefaultFolds},
                                        std::pair{"jitter", kDefaultJitter}}) {
      if (request.contains(key) && !request[key].is_number_integer()) {
        return ErrorResponse(422, std::string("'") + key + "' must be an integer");
      }
      event[key] = request.value(key, fallback);
    }
    const std::string& word = event["word"].get_ref<const std::string&>();
    if (!IsValidUtf8(word)) return ErrorResponse(422, "word is not valid UTF-8");
    if (lex->Find(word)) return ErrorResponse(409, "'" + word + "' is already in lexicon " + lexicon_id);
    const int n = static_cast<int>(lex->entries.size());
    const int m = event["m"], folds = event["folds"], jitter = event["jitter"];
    const int minimum = SearchDepth(static_cast<std::size_t>(n));
    if (n < 2) return ErrorResponse(422, "lexicon needs at least two words");
    if (m < minimum) {
      return ErrorResponse(422, "m must be at least ceil(log2 n) = " + std::to_string(minimum),
                           {{"minimum_m", minimum}});
    }
    if (m > n) return ErrorResponse(422, "m exceeds the lexicon size " + std::to_string(n), {{"maximum_m", n}});
    if (folds < 1) return ErrorResponse(422, "folds must be >= 1");
    if (jitter < 0) return ErrorResponse(422, "jitter must be >= 0");
    return CreateSession(std::move(event));
  }

  // Body: {part, parts, folds, seed, annotator}. All parts created with the
  // same seed and folds partition one shuffled round robin.
  Response CreateRoundRobinSession(const std::string& lexicon_id, std::string_view body) {
    const auto lex = FindLexicon(lexicon_id);
    if (!lex) return ErrorResponse(404, "unknown lexicon '" + lexicon_id + "'");
    json request;
    if (!ParseBody(body, request)) return ErrorResponse(400, "body is not a JSON object");
    json event{{"event", "create"},
               {"kind", "round_robin"},
               {"lexicon", lexicon_id},
               {"annotator", request.value("annotator", std::string())}};
    for (const auto& [key, fallback] : {std::pair{"part", 0}, std::pair{"parts", 1}, std::pair{"folds", 1}}) {
      if (request.contains(key) && !request[key].is_number_integer()) {
        return ErrorResponse(422, std::string("'") + key + "' must be an integer");
      }
      event[key] = request.value(key, fallback);
    }
    if (request.contains("seed") && !request["seed"].is_number_unsigned()) {
      return ErrorResponse(422, "'seed' must be a non-negative integer");
    }
    event["pair_seed"] = request.value("seed", options_.seed);
    const int part = event["part"], parts = event["parts"], folds = event["folds"];
    if (parts < 1 || part < 0 || part >= parts) return ErrorResponse(422, "need 0 <= part < parts");
    if (folds < 1) return ErrorResponse(422, "folds must be >= 1");
    if (lex->entries.size() < 2) return ErrorResponse(422, "lexicon needs at least two words");
    return CreateSession(std::move(event));
  }

  Response ListSessions() const {
    std::vector<std::shared_ptr<Session>> all;
    {
      std::lock_guard<std::mutex> lock(mu_);
      for (const auto& id : session_order_) all.push_back(sessions_.at(id));
    }
    json list = json::array();
    for (const auto& s : all) {
      std::lock_guard<std::mutex> lock(s->mu);
      list.push_back(s->Summary());
    }
    return {200, {{"sessions", list}}, std::nullopt};
  }

  Response GetSession(const std::string& id) const {
    const auto s = FindSession(id);
    if (!s) return ErrorResponse(404, "unknown session '" + id + "'");
    std::lock_guard<std::mutex> lock(s->mu);
    return {200, s->Summary(), std::nullopt};
  }

  Response Next(const std::string& id) const {
    const auto s = FindSession(id);
    if (!s) return ErrorResponse(404, "unknown session '" + id + "'");
    std::lock_guard<std::mutex> lock(s->mu);
    json out{{"session", id}, {"status", SessionStatusName(s->status)}, {"progress", s->Progress()}};
    if (s->status == SessionStatus::kActive) {
      const auto [a, b] = s->CurrentPair();
      out["pair"] = {a, b};
    } else {
      out["pair"] = nullptr;
    }
    return {200, out, std::nullopt};
  }

  // Body: {outcome: first|draw|second, pair: [a, b] (optional), annotator}.
  // The outcome refers to the pair as served by Next.
  Response Judge(const std::string& id, std::string_view body, const std::string& idempotency_key) {
    const auto s = FindSession(id);
    if (!s) return ErrorResponse(404, "unknown session '" + id + "'");
    std::lock_guard<std::mutex> lock(s->mu);
    if (!idempotency_key.empty()) {
      const auto it = s->replies.find(idempotency_key);
      if (it != s->replies.end()) return {200, it->second, std::nullopt};
    }
    if (s->status != SessionStatus::kActive) {
      return ErrorResponse(410, "session is " + std::string(SessionStatusName(s->status)),
                           {{"status", SessionStatusName(s->status)}});
    }
    json request;
    if (!ParseBody(body, request)) return ErrorResponse(400, "body is not a JSON object");
    if (!request.contains("outcome") || !request["outcome"].is_string()) {
      return ErrorResponse(422, "missing 'outcome'");
    }
    PairOutcome outcome;
    try {
      outcome = ParseOutcomeToken(request["outcome"].get<std::string>());
    } catch (const Error& e) {
      return ErrorResponse(422, e.detail());
    }
    const auto current = s->CurrentPair();
    const json served = {current.first, current.second};
    if (request.contains("pair") && request["pair"] != served) {
      return ErrorResponse(409, "judgment is for a pair that is no longer pending", {{"pair", served}});
    }
    ComparisonRecord rec;
    rec.first = current.first;
    rec.second = current.second;
    rec.outcome = outcome;
    rec.annotator = request.value("annotator", s->annotator);
    rec.timestamp = UtcNow();
    rec.extra = {id, idempotency_key};
    if (judgments_) {
      try {
        judgments_->Append(rec);
      } catch (const Error& e) {
        return ErrorResponse(500, e.detail());
      }
    }
    return {200, Accept(*s, outcome, idempotency_key), std::nullopt};
  }

  Response Estimate(const std::string& id) const {
    const auto s = FindSession(id);
    if (!s) return ErrorResponse(404, "unknown session '" + id + "'");
    std::lock_guard<std::mutex> lock(s->mu);
    if (s->kind != SessionKind::kInsertion) return ErrorResponse(409, "round-robin sessions have no estimate");
    if (!s->estimate) {
      return ErrorResponse(409, "session is not complete",
                           {{"status", SessionStatusName(s->status)}, {"progress", s->Progress()}});
    }
    json out = s->EstimateJson();
    out["session"] = id;
    out["word"] = s->word;
    return {200, out, std::nullopt};
  }

  Response Abandon(const std::string& id) {
    const auto s = FindSession(id);
    if (!s) return ErrorResponse(404, "unknown session '" + id + "'");
    std::lock_guard<std::mutex> lock(s->mu);
    if (s->status != SessionStatus::kActive) {
      return ErrorResponse(410, "session is " + std::string(SessionStatusName(s->status)));
    }
    if (events_) events_->Append({{"event", "abandon"}, {"session", id}});
    s->status = SessionStatus::kAbandoned;
    return {200, s->Summary(), std::nullopt};
  }

 private:
  static bool ParseBody(std::string_view body, json& out) {
    if (body.empty()) {
      out = json::object();
      return true;
    }
    try {
      out = json::parse(body);
    } catch (const json::exception&) {
      return false;
    }
    return out.is_object();
  }

  static json LexiconSummary(const std::string& id, const Lexicon& lex) {
    return {{"id", id},
            {"word_count", lex.entries.size()},
            {"family", FamilyName(lex.model.distribution.family)},
            {"sigma", lex.model.distribution.sigma},
            {"t", lex.model.t},
            {"method", FitMethodName(lex.model.method)}};
  }

  std::filesystem::path LexiconPath(const std::string& id) const {
    return options_.data_dir / "lexicons" / (id + ".json");
  }

  std::shared_ptr<const Lexicon> FindLexicon(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = lexicons_.find(id);
    return it == lexicons_.end() ? nullptr : it->second;
  }

  std::shared_ptr<Session> FindSession(const std::string& id) const {
    std::lock_guard<std::mutex> lock(mu_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  Response CreateSession(json event) {
    std::lock_guard<std::mutex> lock(mu_);
    const std::string id = "s" + std::to_string(session_counter_ + 1);
    event["session"] = id;
    event["seed"] = StreamFor(options_.seed, {session_counter_ + 1})();
    std::shared_ptr<Session> session;
    try {
      session = BuildSession(event);
    } catch (const Error& e) {
      return ErrorResponse(422, e.detail());
    }
    if (events_) events_->Append(event);
    ++session_counter_;
    sessions_[id] = session;
    session_order_.push_back(id);
    std::lock_guard<std::mutex> session_lock(session->mu);
    return {201, session->Summary(), std::nullopt};
  }

  // Session state from its creation event. Caller holds mu_.
  std::shared_ptr<Session> BuildSession(const json& event) const {
    const auto lex_it = lexicons_.find(event.at("lexicon").get<std::string>());
    if (lex_it == lexicons_.end()) throw Error(ErrorCode::kParse, "event refers to an unknown lexicon");
    const Lexicon& lex = *lex_it->second;
    auto s = std::make_shared<Session>();
    s->id = event.at("session");
    s->lexicon_id = lex_it->first;
    s->annotator = event.value("annotator", std::string());
    s->seed = event.at("seed");
    s->distribution = lex.model.distribution;
    s->draw_width = DrawWidth(lex.model.t);
    if (event.at("kind") == "insertion") {
      s->kind = SessionKind::kInsertion;
      s->word = event.at("word");
      s->m = event.at("m");
      s->folds = event.at("folds");
      s->jitter = event.at("jitter");
      InsertionOptions options;
      options.comparisons = s->m;
      options.folds = s->folds;
      options.pivot_jitter = s->jitter;
      options.seed = s->seed;
      s->insertion.emplace(s->word, lex.Anchors(), options);
    } else {
      s->kind = SessionKind::kRoundRobin;
      s->part = event.at("part");
      s->parts = event.at("parts");
      std::vector<std::string> words;
      for (const auto& e : lex.entries) words.push_back(e.word);
      std::sort(words.begin(), words.end());
      const auto all = RoundRobinPairs(words, event.at("folds"), event.at("pair_seed"));
      for (std::size_t k = s->part; k < all.size(); k += s->parts) s->queue.push_back(all[k]);
      if (s->queue.empty()) s->status = SessionStatus::kComplete;
    }
    return s;
  }

  // Advances the session and records the reply. Caller holds s.mu.
  static json Accept(Session& s, PairOutcome outcome, const std::string& idempotency_key) {
    const auto pair = s.CurrentPair();
    s.Apply(outcome);
    json reply{{"session", s.id},
               {"accepted", {{"pair", {pair.first, pair.second}}, {"outcome", OutcomeToken(outcome)}}},
               {"status", SessionStatusName(s.status)},
               {"progress", s.Progress()}};
    if (s.status == SessionStatus::kActive) {
      const auto next = s.CurrentPair();
      reply["next"] = {next.first, next.second};
    } else if (s.estimate) {
      reply["estimate"] = s.EstimateJson();
    }
    if (!idempotency_key.empty()) s.replies[idempotency_key] = reply;
    return reply;
  }

  void Replay() {
    const auto lex_dir = options_.data_dir / "lexicons";
    static const std::regex kLexiconFile(R"(lex(\d+)\.json)");
    for (const auto& entry : std::filesystem::directory_iterator(lex_dir)) {
      const std::string name = entry.path().filename().string();
      std::smatch match;
      if (!std::regex_match(name, match, kLexiconFile)) continue;
      const std::string id = "lex" + match[1].str();
      lexicons_[id] = std::make_shared<const Lexicon>(ReadLexiconFile(entry.path()));
      lexicon_counter_ = std::max<std::uint64_t>(lexicon_counter_, std::stoull(match[1].str()));
    }
    std::vector<std::string> abandoned;
    for (const json& event : JsonLineLog::Replay(options_.data_dir / "events.jsonl")) {
      const std::string type = event.value("event", std::string());
      if (type == "create") {
        auto s = BuildSession(event);
        const std::string id = s->id;
        sessions_[id] = std::move(s);
        session_order_.push_back(id);
        ++session_counter_;
      } else if (type == "abandon") {
        abandoned.push_back(event.at("session"));
      } else if (type == "grade") {
        DirectGrade g{event.at("word"), event.value("annotator", std::string()),
                      ParseGrade(event.at("grade").get<std::string>())};
        grades_[event.at("lexicon")].push_back(std::move(g));
      }
    }
    const auto log_path = options_.data_dir / "judgments.csv";
    if (std::filesystem::exists(log_path)) {
      const ComparisonTable table = ComparisonLog::Replay(log_path);
      if (table.extra_columns != std::vector<std::string>{"session", "idempotency_key"}) {
        throw Error(ErrorCode::kParse, "judgment log has unexpected columns");
      }
      for (const auto& rec : table.records) {
        const auto it = sessions_.find(rec.extra[0]);
        if (it == sessions_.end()) throw Error(ErrorCode::kParse, "judgment for unknown session " + rec.extra[0]);
        Session& s = *it->second;
        if (s.status != SessionStatus::kActive || s.CurrentPair() != std::pair{rec.first, rec.second}) {
          throw Error(ErrorCode::kParse, "judgment log does not match session " + s.id);
        }
        Accept(s, rec.outcome, rec.extra[1]);
      }
    }
    for (const auto& id : abandoned) {
      const auto it = sessions_.find(id);
      if (it != sessions_.end() && it->second->status == SessionStatus::kActive) {
        it->second->status = SessionStatus::kAbandoned;
      }
    }
  }

  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Lexicon>> lexicons_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::vector<std::string> session_order_;
  std::map<std::string, std::vector<DirectGrade>> grades_;
  std::uint64_t lexicon_counter_ = 0;
  std::uint64_t session_counter_ = 0;
  std::unique_ptr<JsonLineLog> events_;
  std::unique_ptr<ComparisonLog> judgments_;
};

// --- HTTP binding -----------------------------------------------------------

struct HttpOptions {
  std::string cors_origin = "*";
  std::filesystem::path ui_dir;  // served at / when set
};

inline void Send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  if (r.raw) {
    res.set_content(*r.raw, "application/json");
  } else {
    res.set_content(r.body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
  }
}

inline void RegisterRoutes(httplib::Server& server, AnnotationService& service, const HttpOptions& http = {}) {
  server.set_post_routing_handler([http](const httplib::Request&, httplib::Response& res) {
    res.set_header(kSchemaHeader, std::to_string(kSchemaVersion));
    res.set_header("Access-Control-Allow-Origin", http.cors_origin);
    res.set_header("Access-Control-Expose-Headers", kSchemaHeader);
  });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, Idempotency-Key");
    res.status = 204;
  });

  server.Get("/api/lexicons", [&](const httplib::Request&, httplib::Response& res) {
    Send(res, service.ListLexicons());
  });
  server.Post("/api/lexicons", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.CreateLexicon(req.body));
  });
  server.Get(R"(/api/lexicons/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.GetLexicon(req.matches[1]));
  });
  server.Get(R"(/api/lexicons/([^/]+)/scores)", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.GetScores(req.matches[1]));
  });
  server.Post(R"(/api/lexicons/([^/]+)/sessions)", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.CreateInsertionSession(req.matches[1], req.body));
  });
  server.Post(R"(/api/lexicons/([^/]+)/round-robin)", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.CreateRoundRobinSession(req.matches[1], req.body));
  });
  server.Post(R"(/api/lexicons/([^/]+)/grades)", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.PostGrade(req.matches[1], req.body));
  });
  server.Get(R"(/api/lexicons/([^/]+)/grades)", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.GetGrades(req.matches[1]));
  });
  server.Get("/api/sessions", [&](const httplib::Request&, httplib::Response& res) {
    Send(res, service.ListSessions());
  });
  server.Get(R"(/api/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.GetSession(req.matches[1]));
  });
  server.Delete(R"(/api/sessions/([^/]+))", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.Abandon(req.matches[1]));
  });
  server.Get(R"(/api/sessions/([^/]+)/next)", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.Next(req.matches[1]));
  });
  server.Post(R"(/api/sessions/([^/]+)/judgments)", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.Judge(req.matches[1], req.body, req.get_header_value("Idempotency-Key")));
  });
  server.Get(R"(/api/sessions/([^/]+)/estimate)", [&](const httplib::Request& req, httplib::Response& res) {
    Send(res, service.Estimate(req.matches[1]));
  });
  if (!http.ui_dir.empty()) server.set_mount_point("/", http.ui_dir.string());
}

}  // namespace pairrank::service

#endif  // PAIRRANK_SERVICE_H_
