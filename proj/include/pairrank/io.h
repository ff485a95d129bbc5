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

// File formats.
//
//   comparisons  CSV, header required. Columns first,second,outcome plus the
//                optional annotator and timestamp; any other column is kept
//                verbatim and written back after the known ones. Outcome is
//                one of first|draw|second.
//   lexicon      JSON, format_version 1, keys in a fixed order, scores with
//                exactly six decimals. Words must be unique after Unicode NFC
//                normalization.
//   direct       CSV word,annotator,grade (five-grade scale).
//   word scores  any comma or tab separated word,score list, header optional.
//
// The comparison log is the comparisons format opened for append: one record
// per line, flushed and synced before Append returns.

#ifndef PAIRRANK_IO_H_
#define PAIRRANK_IO_H_

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>
#include <unicode/ustring.h>

#include "pairrank/adaptive.h"
#include "pairrank/analysis.h"
#include "pairrank/error.h"
#include "pairrank/estimate_joint.h"
#include "pairrank/harness.h"
#include "pairrank/model.h"

namespace pairrank {

// --- Numbers ----------------------------------------------------------------

// Fixed-point with `decimals` digits. Never emits a negative zero; non-finite
// values print as inf, -inf or nan.
inline std::string FormatFixed(double value, int decimals = 6) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  std::string out(buf);
  if (out[0] == '-' && out.find_first_not_of("-0.") == std::string::npos) out.erase(0, 1);
  return out;
}

// Shortest form that reads back to the same double.
inline std::string FormatExact(double value) {
  if (!std::isfinite(value)) return FormatFixed(value);
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

inline std::optional<double> ParseDouble(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

// --- Files ------------------------------------------------------------------

inline std::string ReadFileText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a temporary file and renames it into place.
inline void WriteFileAtomic(const std::filesystem::path& path, std::string_view content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw Error(ErrorCode::kIo, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot replace '" + path.string() + "': " + ec.message());
}

// --- Text -------------------------------------------------------------------

inline bool IsValidUtf8(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  int32_t length = 0;
  u_strFromUTF8(nullptr, 0, &length, text.data(), static_cast<int32_t>(text.size()), &status);
  return status == U_BUFFER_OVERFLOW_ERROR || U_SUCCESS(status);
}

inline std::string NormalizeNfc(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kIo, "ICU NFC normalizer unavailable");
  const icu::UnicodeString source =
      icu::UnicodeString::fromUTF8(icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  const icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw Error(ErrorCode::kParse, "cannot normalize '" + std::string(text) + "'");
  std::string out;
  normalized.toUTF8String(out);
  return out;
}

// --- CSV --------------------------------------------------------------------

struct CsvRow {
  int line = 0;  // physical line on which the row starts, 1-based
  std::vector<std::string> fields;
};

// RFC 4180 with LF or CRLF line ends. Fully empty lines are skipped. A
// leading UTF-8 byte-order mark is ignored.
inline std::vector<CsvRow> ParseCsv(std::string_view text, char delimiter = ',') {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  if (!IsValidUtf8(text)) throw Error(ErrorCode::kParse, "input is not valid UTF-8");
  std::vector<CsvRow> rows;
  std::size_t pos = 0;
  int line = 1;
  while (pos < text.size()) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool row_done = false;
    bool any_content = false;
    while (!row_done) {
      field.clear();
      if (pos < text.size() && text[pos] == '"') {
        any_content = true;
        ++pos;
        for (;;) {
          if (pos >= text.size()) {
            throw Error(ErrorCode::kParse, "line " + std::to_string(row.line) + ": unterminated quoted field");
          }
          const char c = text[pos++];
          if (c == '"') {
            if (pos < text.size() && text[pos] == '"') {
              field += '"';
              ++pos;
            } else {
              break;
            }
          } else {
            if (c == '\n') ++line;
            field += c;
          }
        }
        if (pos < text.size() && text[pos] != delimiter && text[pos] != '\n' && text[pos] != '\r') {
          throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": text after closing quote");
        }
      } else {
        while (pos < text.size() && text[pos] != delimiter && text[pos] != '\n' && text[pos] != '\r') {
          if (text[pos] == '"') {
            throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": quote inside unquoted field");
          }
          field += text[pos++];
        }
        if (!field.empty()) any_content = true;
      }
      row.fields.push_back(field);
      if (pos >= text.size()) {
        row_done = true;
      } else if (text[pos] == delimiter) {
        any_content = true;
        ++pos;
      } else {
        if (text[pos] == '\r') {
          ++pos;
          if (pos < text.size() && text[pos] != '\n') {
            throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": bare carriage return");
          }
        }
        if (pos < text.size()) ++pos;  // '\n'
        ++line;
        row_done = true;
      }
    }
    if (any_content) rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string CsvField(std::string_view value, char delimiter = ',') {
  if (value.find_first_of(std::string{'"', '\r', '\n', delimiter}) == std::string_view::npos) {
    return std::string(value);
  }
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string CsvLine(const std::vector<std::string>& fields, char delimiter = ',') {
  std::string out;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out += delimiter;
    out += CsvField(fields[k], delimiter);
  }
  out += '\n';
  return out;
}

namespace internal {

inline std::string AtLine(int line) { return "line " + std::to_string(line) + ": "; }

// Maps header names to positions; rejects empty and repeated names.
inline std::map<std::string, std::size_t> HeaderIndex(const CsvRow& header) {
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < header.fields.size(); ++k) {
    const std::string& name = header.fields[k];
    if (name.empty()) throw Error(ErrorCode::kParse, AtLine(header.line) + "empty column name");
    if (!index.emplace(name, k).second) {
      throw Error(ErrorCode::kParse, AtLine(header.line) + "duplicate column '" + name + "'");
    }
  }
  return index;
}

}  // namespace internal

// --- Comparisons ------------------------------------------------------------

inline std::string_view OutcomeToken(PairOutcome outcome) {
  switch (outcome) {
    case PairOutcome::kFirstWins: return "first";
    case PairOutcome::kDraw: return "draw";
    case PairOutcome::kSecondWins: return "second";
  }
  return "draw";
}

inline PairOutcome ParseOutcomeToken(std::string_view token) {
  if (token == "first") return PairOutcome::kFirstWins;
  if (token == "draw") return PairOutcome::kDraw;
  if (token == "second") return PairOutcome::kSecondWins;
  throw Error(ErrorCode::kParse, "unknown outcome '" + std::string(token) + "' (expected first, draw or second)");
}

// ISO 8601 date or date-time; empty means absent.
inline bool IsValidTimestamp(std::string_view text) {
  if (text.empty()) return true;
  static const std::regex kPattern(
      R"(\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?)");
  return std::regex_match(text.begin(), text.end(), kPattern);
}

inline const std::vector<std::string>& KnownComparisonColumns() {
  static const std::vector<std::string> kColumns{"first", "second", "outcome", "annotator", "timestamp"};
  return kColumns;
}

struct ComparisonTable {
  std::vector<std::string> extra_columns;
  std::vector<ComparisonRecord> records;
};

inline ComparisonTable ParseComparisons(std::string_view text) {
  const std::vector<CsvRow> rows = ParseCsv(text);
  if (rows.empty()) throw Error(ErrorCode::kParse, "missing header row");
  const CsvRow& header = rows.front();
  const auto index = internal::HeaderIndex(header);
  for (const char* required : {"first", "second", "outcome"}) {
    if (!index.count(required)) {
      throw Error(ErrorCode::kParse, internal::AtLine(header.line) + "missing column '" + required + "'");
    }
  }
  auto column = [&](const char* name) -> std::optional<std::size_t> {
    const auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };
  const std::size_t c_first = *column("first"), c_second = *column("second");
  const std::size_t c_outcome = *column("outcome");
  const auto c_annotator = column("annotator"), c_timestamp = column("timestamp");

  ComparisonTable table;
  std::vector<std::size_t> extra_positions;
  const auto& known = KnownComparisonColumns();
  for (std::size_t k = 0; k < header.fields.size(); ++k) {
    if (std::find(known.begin(), known.end(), header.fields[k]) == known.end()) {
      table.extra_columns.push_back(header.fields[k]);
      extra_positions.push_back(k);
    }
  }
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow& row = rows[r];
    const std::string at = internal::AtLine(row.line);
    if (row.fields == header.fields) throw Error(ErrorCode::kParse, at + "duplicate header row");
    if (row.fields.size() != header.fields.size()) {
      throw Error(ErrorCode::kParse, at + "expected " + std::to_string(header.fields.size()) +
                                         " fields, found " + std::to_string(row.fields.size()));
    }
    ComparisonRecord rec;
    rec.first = row.fields[c_first];
    rec.second = row.fields[c_second];
    if (rec.first.empty() || rec.second.empty()) throw Error(ErrorCode::kParse, at + "empty item name");
    if (rec.first == rec.second) throw Error(ErrorCode::kParse, at + "item compared with itself");
    try {
      rec.outcome = ParseOutcomeToken(row.fields[c_outcome]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, at + e.detail());
    }
    if (c_annotator) rec.annotator = row.fields[*c_annotator];
    if (c_timestamp) {
      rec.timestamp = row.fields[*c_timestamp];
      if (!IsValidTimestamp(rec.timestamp)) {
        throw Error(ErrorCode::kParse, at + "malformed timestamp '" + rec.timestamp + "'");
      }
    }
    for (std::size_t p : extra_positions) rec.extra.push_back(row.fields[p]);
    table.records.push_back(std::move(rec));
  }
  return table;
}

inline ComparisonTable ReadComparisonsFile(const std::filesystem::path& path) {
  try {
    return ParseComparisons(ReadFileText(path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kParse) throw;
    throw Error(ErrorCode::kParse, path.string() + ": " + e.detail());
  }
}

inline std::string ComparisonHeaderLine(const std::vector<std::string>& extra_columns) {
  std::vector<std::string> header = KnownComparisonColumns();
  header.insert(header.end(), extra_columns.begin(), extra_columns.end());
  return CsvLine(header);
}

inline std::string ComparisonLine(const ComparisonRecord& rec, std::size_t extra_count) {
  if (rec.extra.size() != extra_count) {
    throw Error(ErrorCode::kInvalidArgument, "record has " + std::to_string(rec.extra.size()) +
                                                 " extra fields, table has " + std::to_string(extra_count));
  }
  std::vector<std::string> fields{rec.first, rec.second, std::string(OutcomeToken(rec.outcome)),
                                  rec.annotator, rec.timestamp};
  fields.insert(fields.end(), rec.extra.begin(), rec.extra.end());
  return CsvLine(fields);
}

inline std::string FormatComparisons(const ComparisonTable& table) {
  std::string out = ComparisonHeaderLine(table.extra_columns);
  for (const auto& rec : table.records) out += ComparisonLine(rec, table.extra_columns.size());
  return out;
}

inline void WriteComparisonsFile(const std::filesystem::path& path, const ComparisonTable& table) {
  WriteFileAtomic(path, FormatComparisons(table));
}

// --- Lexicon ----------------------------------------------------------------

inline constexpr int kLexiconFormatVersion = 1;

struct LexiconEntry {
  std::string word;
  double score = 0.0;
  std::optional<double> bootstrap_sd;
};

struct LexiconModel {
  Distribution distribution;
  double t = 0.0;
  double origin_shift = 0.0;
  bool calibrated = false;
  FitMethod method = FitMethod::kLsq;
};

struct LexiconProvenance {
  std::size_t record_count = 0;
  std::optional<std::string> created_at;
  std::vector<std::uint64_t> seeds;
};

struct Lexicon {
  int format_version = kLexiconFormatVersion;
  LexiconModel model;
  LexiconProvenance provenance;
  std::vector<LexiconEntry> entries;

  const LexiconEntry* Find(std::string_view word) const {
    const std::string key = NormalizeNfc(word);
    for (const auto& e : entries) {
      if (NormalizeNfc(e.word) == key) return &e;
    }
    return nullptr;
  }

  std::vector<Anchor> Anchors() const {
    std::vector<Anchor> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back({e.word, e.score});
    return out;
  }

  // Entries as a fit, for model checks against a stored lexicon.
  ModelFit ToFit() const {
    ModelFit fit;
    fit.distribution = model.distribution;
    fit.draw_width = DrawWidth(model.t);
    fit.origin_shift = model.origin_shift;
    fit.calibrated = model.calibrated;
    fit.method = model.method;
    fit.converged = true;
    std::vector<const LexiconEntry*> sorted;
    for (const auto& e : entries) sorted.push_back(&e);
    std::sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a->word < b->word; });
    for (const auto* e : sorted) {
      fit.items.push_back(e->word);
      fit.ratings.push_back(e->score);
    }
    fit.component.assign(fit.items.size(), 0);
    return fit;
  }
};

// Throws on invalid fields and on words that coincide after NFC
// normalization.
inline void ValidateLexicon(const Lexicon& lexicon) {
  if (lexicon.format_version != kLexiconFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "lexicon format_version " + std::to_string(lexicon.format_version) +
                    " is not supported (expected " + std::to_string(kLexiconFormatVersion) + ")");
  }
  lexicon.model.distribution.Validate();
  if (!std::isfinite(lexicon.model.t) || lexicon.model.t < 0.0) {
    throw Error(ErrorCode::kParse, "draw width must be finite and non-negative");
  }
  if (!std::isfinite(lexicon.model.origin_shift)) {
    throw Error(ErrorCode::kParse, "origin_shift must be finite");
  }
  std::unordered_map<std::string, std::string> seen;
  for (const auto& e : lexicon.entries) {
    if (e.word.empty()) throw Error(ErrorCode::kParse, "empty word in lexicon");
    if (!IsValidUtf8(e.word)) throw Error(ErrorCode::kParse, "word is not valid UTF-8");
    if (!std::isfinite(e.score)) throw Error(ErrorCode::kParse, "score of '" + e.word + "' is not finite");
    if (e.bootstrap_sd && !(std::isfinite(*e.bootstrap_sd) && *e.bootstrap_sd >= 0.0)) {
      throw Error(ErrorCode::kParse, "bootstrap_sd of '" + e.word + "' must be finite and >= 0");
    }
    const auto [it, inserted] = seen.emplace(NormalizeNfc(e.word), e.word);
    if (!inserted) {
      throw Error(ErrorCode::kDuplicateWord,
                  "words '" + it->second + "' and '" + e.word +
                      "' are identical after NFC normalization; merge their comparisons "
                      "under one spelling and refit");
    }
  }
}

inline Lexicon LexiconFromFit(const ModelFit& fit, const std::map<std::string, double>* sd = nullptr,
                              LexiconProvenance provenance = {}) {
  Lexicon lexicon;
  lexicon.model.distribution = fit.distribution;
  lexicon.model.t = fit.draw_width.value();
  lexicon.model.origin_shift = fit.origin_shift;
  lexicon.model.calibrated = fit.calibrated;
  lexicon.model.method = fit.method;
  lexicon.provenance = std::move(provenance);
  for (std::size_t k = 0; k < fit.items.size(); ++k) {
    LexiconEntry e{fit.items[k], fit.ratings[k], std::nullopt};
    if (sd) {
      const auto it = sd->find(fit.items[k]);
      if (it != sd->end()) e.bootstrap_sd = it->second;
    }
    lexicon.entries.push_back(std::move(e));
  }
  return lexicon;
}

namespace internal {

inline std::string JsonString(std::string_view s) {
  return nlohmann::json(std::string(s)).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
}

}  // namespace internal

inline std::string FormatLexicon(const Lexicon& lexicon) {
  ValidateLexicon(lexicon);
  using internal::JsonString;
  const LexiconModel& m = lexicon.model;
  std::string out = "{\n";
  out += "  \"format_version\": " + std::to_string(lexicon.format_version) + ",\n";
  out += "  \"model\": {\n";
  out += "    \"family\": " + JsonString(FamilyName(m.distribution.family)) + ",\n";
  out += "    \"sigma\": " + FormatExact(m.distribution.sigma) + ",\n";
  out += "    \"t\": " + FormatExact(m.t) + ",\n";
  out += "    \"origin_shift\": " + FormatExact(m.origin_shift) + ",\n";
  out += std::string("    \"calibrated\": ") + (m.calibrated ? "true" : "false") + ",\n";
  out += "    \"method\": " + JsonString(FitMethodName(m.method)) + "\n";
  out += "  },\n";
  const LexiconProvenance& p = lexicon.provenance;
  out += "  \"provenance\": {\n";
  out += "    \"record_count\": " + std::to_string(p.record_count) + ",\n";
  out += "    \"created_at\": " + (p.created_at ? JsonString(*p.created_at) : std::string("null")) + ",\n";
  out += "    \"seeds\": [";
  for (std::size_t k = 0; k < p.seeds.size(); ++k) {
    if (k) out += ", ";
    out += std::to_string(p.seeds[k]);
  }
  out += "]\n  },\n";
  out += "  \"entries\": [";
  for (std::size_t k = 0; k < lexicon.entries.size(); ++k) {
    const auto& e = lexicon.entries[k];
    out += k ? ",\n    " : "\n    ";
    out += "{\"word\": " + JsonString(e.word) + ", \"score\": " + FormatFixed(e.score);
    if (e.bootstrap_sd) out += ", \"bootstrap_sd\": " + FormatFixed(*e.bootstrap_sd);
    out += "}";
  }
  out += lexicon.entries.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

inline Lexicon ParseLexicon(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("lexicon is not valid JSON: ") + e.what());
  }
  auto fail = [](const std::string& what) { return Error(ErrorCode::kParse, "lexicon: " + what); };
  if (!doc.is_object()) throw fail("top level must be an object");
  if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
    throw fail("missing integer format_version");
  }
  Lexicon lexicon;
  lexicon.format_version = doc["format_version"].get<int>();
  if (lexicon.format_version != kLexiconFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                "lexicon format_version " + std::to_string(lexicon.format_version) +
                    " is not supported (expected " + std::to_string(kLexiconFormatVersion) + ")");
  }
  auto number = [&](const nlohmann::json& obj, const char* key, std::optional<double> fallback) {
    if (!obj.contains(key) || obj[key].is_null()) {
      if (fallback) return *fallback;
      throw fail(std::string("missing '") + key + "'");
    }
    if (!obj[key].is_number()) throw fail(std::string("'") + key + "' must be a number");
    return obj[key].get<double>();
  };
  try {
    const auto& model = doc.at("model");
    if (!model.is_object()) throw fail("model must be an object");
    lexicon.model.distribution.family = ParseFamily(model.at("family").get<std::string>());
    lexicon.model.distribution.sigma = number(model, "sigma", kDefaultSigma);
    lexicon.model.t = number(model, "t", std::nullopt);
    lexicon.model.origin_shift = number(model, "origin_shift", 0.0);
    lexicon.model.calibrated = model.value("calibrated", lexicon.model.origin_shift != 0.0);
    lexicon.model.method = ParseFitMethod(model.value("method", std::string("lsq")));
    if (doc.contains("provenance") && doc["provenance"].is_object()) {
      const auto& p = doc["provenance"];
      lexicon.provenance.record_count = p.value("record_count", std::size_t{0});
      if (p.contains("created_at") && p["created_at"].is_string()) {
        lexicon.provenance.created_at = p["created_at"].get<std::string>();
      }
      if (p.contains("seeds") && p["seeds"].is_array()) {
        for (const auto& s : p["seeds"]) lexicon.provenance.seeds.push_back(s.get<std::uint64_t>());
      }
    }
    const auto& entries = doc.at("entries");
    if (!entries.is_array()) throw fail("entries must be an array");
    for (const auto& e : entries) {
      if (!e.is_object() || !e.contains("word") || !e["word"].is_string()) {
        throw fail("every entry needs a string 'word'");
      }
      LexiconEntry entry;
      entry.word = e["word"].get<std::string>();
      entry.score = number(e, "score", std::nullopt);
      if (e.contains("bootstrap_sd") && !e["bootstrap_sd"].is_null()) {
        entry.bootstrap_sd = number(e, "bootstrap_sd", std::nullopt);
      }
      lexicon.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  ValidateLexicon(lexicon);
  return lexicon;
}

inline Lexicon ReadLexiconFile(const std::filesystem::path& path) {
  return ParseLexicon(ReadFileText(path));
}

inline void WriteLexiconFile(const std::filesystem::path& path, const Lexicon& lexicon) {
  WriteFileAtomic(path, FormatLexicon(lexicon));
}

// --- Direct scores ----------------------------------------------------------

struct DirectGrade {
  std::string word;
  std::string annotator;
  Grade grade = Grade::kNeutral;
};

inline std::vector<DirectGrade> ParseDirectGrades(std::string_view text) {
  const auto rows = ParseCsv(text);
  if (rows.empty()) throw Error(ErrorCode::kParse, "missing header row");
  const auto index = internal::HeaderIndex(rows.front());
  for (const char* required : {"word", "grade"}) {
    if (!index.count(required)) {
      throw Error(ErrorCode::kParse, internal::AtLine(rows.front().line) + "missing column '" + required + "'");
    }
  }
  const auto annotator = index.find("annotator");
  std::vector<DirectGrade> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string at = internal::AtLine(row.line);
    if (row.fields == rows.front().fields) throw Error(ErrorCode::kParse, at + "duplicate header row");
    if (row.fields.size() != rows.front().fields.size()) throw Error(ErrorCode::kParse, at + "wrong field count");
    DirectGrade g;
    g.word = row.fields[index.at("word")];
    if (g.word.empty()) throw Error(ErrorCode::kParse, at + "empty word");
    if (annotator != index.end()) g.annotator = row.fields[annotator->second];
    try {
      g.grade = ParseGrade(row.fields[index.at("grade")]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kParse, at + e.detail());
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline std::string FormatDirectGrades(std::span<const DirectGrade> grades) {
  std::string out = "word,annotator,grade\n";
  for (const auto& g : grades) out += CsvLine({g.word, g.annotator, std::string(GradeName(g.grade))});
  return out;
}

// Per-word mean of the metric grade values, ordered by word.
inline std::vector<DirectScore> AverageDirectGrades(std::span<const DirectGrade> grades) {
  std::map<std::string, std::vector<Grade>> by_word;
  for (const auto& g : grades) by_word[g.word].push_back(g.grade);
  std::vector<DirectScore> out;
  for (const auto& [word, list] : by_word) out.push_back(DirectScoreAverage(word, list));
  return out;
}

// --- Generic word,score lists -------------------------------------------------

// Comma or tab separated (decided by the first line). A first line whose score
// does not parse as a number is a header. Lines starting with '#' are skipped.
inline std::vector<std::pair<std::string, double>> ParseWordScores(std::string_view text) {
  std::string filtered;
  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty() && line[0] == '#') line.clear();
    filtered += line + "\n";
  }
  std::string first_line;
  std::istringstream scan(filtered);
  while (std::getline(scan, first_line) && first_line.empty()) {
  }
  const char delimiter = first_line.find('\t') != std::string::npos ? '\t' : ',';
  const auto rows = ParseCsv(filtered, delimiter);
  std::vector<std::pair<std::string, double>> out;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string at = internal::AtLine(row.line);
    if (row.fields.size() < 2) throw Error(ErrorCode::kParse, at + "expected word and score");
    const auto score = ParseDouble(row.fields[1]);
    if (!score) {
      if (r == 0) continue;
      throw Error(ErrorCode::kParse, at + "score '" + row.fields[1] + "' is not a number");
    }
    if (!std::isfinite(*score)) throw Error(ErrorCode::kParse, at + "score is not finite");
    if (!seen.insert(NormalizeNfc(row.fields[0])).second) {
      throw Error(ErrorCode::kDuplicateWord, at + "duplicate word '" + row.fields[0] + "'");
    }
    out.emplace_back(row.fields[0], *score);
  }
  return out;
}

// Word scores from a lexicon (.json) or a delimited list.
inline std::vector<std::pair<std::string, double>> ReadScoresFile(const std::filesystem::path& path) {
  const std::string text = ReadFileText(path);
  if (path.extension() == ".json") {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& e : ParseLexicon(text).entries) out.emplace_back(e.word, e.score);
    return out;
  }
  return ParseWordScores(text);
}

struct ScorePairs {
  std::vector<std::string> words;
  std::vector<double> a;
  std::vector<double> b;
};

// Words present in both lists (compared after NFC normalization), in the
// order of `a`.
inline ScorePairs JoinScores(std::span<const std::pair<std::string, double>> a,
                             std::span<const std::pair<std::string, double>> b) {
  std::unordered_map<std::string, double> lookup;
  for (const auto& [word, score] : b) lookup.emplace(NormalizeNfc(word), score);
  ScorePairs out;
  for (const auto& [word, score] : a) {
    const auto it = lookup.find(NormalizeNfc(word));
    if (it == lookup.end()) continue;
    out.words.push_back(word);
    out.a.push_back(score);
    out.b.push_back(it->second);
  }
  return out;
}

// --- Append-only comparison log -----------------------------------------------

class ComparisonLog {
 public:
  // Opens or creates the log. An existing file must carry the same header; a
  // trailing partial line left by a crash is cut off before appending.
  ComparisonLog(std::filesystem::path path, std::vector<std::string> extra_columns)
      : path_(std::move(path)), extra_columns_(std::move(extra_columns)) {
    const std::string header = ComparisonHeaderLine(extra_columns_);
    std::error_code ec;
    if (std::filesystem::exists(path_, ec) && std::filesystem::file_size(path_, ec) > 0) {
      const std::string text = ReadFileText(path_);
      const std::size_t complete = text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1;
      if (text.compare(0, header.size(), header) != 0) {
        throw Error(ErrorCode::kParse, "log '" + path_.string() + "' has an unexpected header");
      }
      if (complete < text.size()) std::filesystem::resize_file(path_, complete);
    } else {
      WriteFileAtomic(path_, header);
    }
    fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CLOEXEC);
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open log '" + path_.string() + "'");
  }

  ComparisonLog(const ComparisonLog&) = delete;
  ComparisonLog& operator=(const ComparisonLog&) = delete;
  ~ComparisonLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  const std::filesystem::path& path() const { return path_; }
  const std::vector<std::string>& extra_columns() const { return extra_columns_; }

  // Writes one line and syncs it to disk. Fields may not contain line breaks,
  // which keeps every line parseable on its own.
  void Append(const ComparisonRecord& rec) {
    auto has_break = [](const std::string& s) { return s.find_first_of("\r\n") != std::string::npos; };
    bool bad = has_break(rec.first) || has_break(rec.second) || has_break(rec.annotator) ||
               has_break(rec.timestamp);
    for (const auto& e : rec.extra) bad = bad || has_break(e);
    if (bad) throw Error(ErrorCode::kInvalidArgument, "log fields may not contain line breaks");
    const std::string line = ComparisonLine(rec, extra_columns_.size());
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
      if (n < 0) throw Error(ErrorCode::kIo, "append to '" + path_.string() + "' failed");
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error(ErrorCode::kIo, "fsync of '" + path_.string() + "' failed");
  }

  // Complete lines only: a partial final line is ignored.
  static ComparisonTable Replay(const std::filesystem::path& path) {
    std::string text = ReadFileText(path);
    const std::size_t last = text.rfind('\n');
    text.resize(last == std::string::npos ? 0 : last + 1);
    return ParseComparisons(text);
  }

 private:
  std::filesystem::path path_;
  std::vector<std::string> extra_columns_;
  std::mutex mu_;
  int fd_ = -1;
};

// One JSON object per line, synced on append. Used for service events that
// are not comparisons.
class JsonLineLog {
 public:
  explicit JsonLineLog(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    if (std::filesystem::exists(path_, ec)) {
      const std::string text = ReadFileText(path_);
      const std::size_t last = text.rfind('\n');
      const std::size_t complete = last == std::string::npos ? 0 : last + 1;
      if (complete < text.size()) std::filesystem::resize_file(path_, complete);
    }
    fd_ = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open log '" + path_.string() + "'");
  }

  JsonLineLog(const JsonLineLog&) = delete;
  JsonLineLog& operator=(const JsonLineLog&) = delete;
  ~JsonLineLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  void Append(const nlohmann::json& event) {
    const std::string line = event.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict) + "\n";
    std::lock_guard<std::mutex> lock(mu_);
    std::size_t written = 0;
    while (written < line.size()) {
      const ssize_t n = ::write(fd_, line.data() + written, line.size() - written);
      if (n < 0) throw Error(ErrorCode::kIo, "append to '" + path_.string() + "' failed");
      written += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error(ErrorCode::kIo, "fsync of '" + path_.string() + "' failed");
  }

  static std::vector<nlohmann::json> Replay(const std::filesystem::path& path) {
    std::vector<nlohmann::json> out;
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return out;
    const std::string text = ReadFileText(path);
    std::size_t start = 0;
    int line = 1;
    for (std::size_t end; (end = text.find('\n', start)) != std::string::npos; start = end + 1, ++line) {
      if (end == start) continue;
      try {
        out.push_back(nlohmann::json::parse(text.substr(start, end - start)));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::kParse, path.string() + ": " + internal::AtLine(line) + e.what());
      }
    }
    return out;
  }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
  int fd_ = -1;
};

// --- Reports ----------------------------------------------------------------

inline std::string FormatLooCurve(const LooResult& result) {
  std::string out = "m,mean_abs_err,median_abs_err,reference_sd,boundary_estimates,max_comparisons_per_fold\n";
  for (const auto& p : result.curve) {
    out += std::to_string(p.m) + "," + FormatFixed(p.mean_abs_err) + "," + FormatFixed(p.median_abs_err) +
           "," + (result.reference_sd ? FormatFixed(*result.reference_sd) : std::string()) + "," +
           std::to_string(p.boundary_estimates) + "," + std::to_string(p.max_comparisons_per_fold) + "\n";
  }
  return out;
}

// One goodness-of-fit row: chi2, dof, p and the 5% critical value.
inline std::string FormatGofRow(const GofReport& report, const Distribution& dist, FitMethod method) {
  std::string out = std::string(FamilyName(dist.family)) + " " + std::string(FitMethodName(method)) +
                    ": chi2=" + FormatFixed(report.chi2, 3) + " dof=" + std::to_string(report.dof) +
                    " p=" + FormatFixed(report.p_value, 6) + " threshold_95=" + FormatFixed(report.threshold_95, 3) +
                    " groups=" + std::to_string(report.group_count()) + "\n";
  return out;
}

inline std::string FormatGofGroups(const GofReport& report) {
  std::string out = "group,lo,hi,size,wins,draws,losses,expected_wins,expected_draws,expected_losses\n";
  for (std::size_t g = 0; g < report.groups.size(); ++g) {
    const auto& x = report.groups[g];
    out += std::to_string(g) + "," + FormatFixed(x.lo) + "," + FormatFixed(x.hi) + "," + std::to_string(x.size) +
           "," + FormatFixed(x.wins, 0) + "," + FormatFixed(x.draws, 0) + "," + FormatFixed(x.losses, 0) + "," +
           FormatFixed(x.expected_wins, 3) + "," + FormatFixed(x.expected_draws, 3) + "," +
           FormatFixed(x.expected_losses, 3) + "\n";
  }
  return out;
}

inline std::string FormatShootout(const ShootoutReport& report) {
  std::string out = "family,method,chi2,dof,p_value,t,recovery_r,converged,error\n";
  for (const auto& row : report.rows) {
    out += CsvLine({std::string(FamilyName(row.family)), std::string(FitMethodName(row.method)),
                    row.error.empty() ? FormatFixed(row.chi2, 3) : "",
                    row.error.empty() ? std::to_string(row.dof) : "",
                    row.error.empty() ? FormatFixed(row.p_value) : "",
                    row.error.empty() ? FormatFixed(row.draw_width) : "",
                    row.error.empty() ? FormatFixed(row.recovery_correlation) : "",
                    row.converged ? "true" : "false", row.error});
  }
  return out;
}

inline std::string FormatDensity(std::span<const DensityPoint> points) {
  std::string out = "x,density\n";
  for (const auto& p : points) out += FormatFixed(p.x) + "," + FormatFixed(p.density) + "\n";
  return out;
}

}  // namespace pairrank

#endif  // PAIRRANK_IO_H_
