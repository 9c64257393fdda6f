// Copyright 2026 The RetroLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "retrolens/corpus/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "retrolens/error.hpp"
#include "retrolens/numeric.hpp"

namespace retrolens::corpus {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kProbTolerance = 1e-6;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Per-line JSON field access that reports the file, line and field name.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string origin, std::size_t line, std::string prefix = {})
      : obj_(obj), origin_(std::move(origin)), line_(line), prefix_(std::move(prefix)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& detail,
                         ErrorCode code = ErrorCode::kSchemaViolation) const {
    throw SchemaError(origin_, line_, prefix_ + field, detail, code);
  }

  const json& require(const std::string& field) const {
    if (!obj_.is_object()) fail(field, "expected an object");
    auto it = obj_.find(field);
    if (it == obj_.end()) fail(field, "missing");
    return *it;
  }

  std::string string(const std::string& field) const {
    const json& v = require(field);
    if (!v.is_string()) fail(field, "expected a string");
    return v.get<std::string>();
  }

  std::optional<std::string> optional_string(const std::string& field) const {
    auto it = obj_.find(field);
    if (it == obj_.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) fail(field, "expected a string");
    return it->get<std::string>();
  }

  std::int64_t integer(const std::string& field) const {
    const json& v = require(field);
    if (!v.is_number_integer()) fail(field, "expected an integer");
    return v.get<std::int64_t>();
  }

  double number(const std::string& field) const {
    const json& v = require(field);
    if (!v.is_number()) fail(field, "expected a number");
    double d = v.get<double>();
    if (!std::isfinite(d)) fail(field, "not finite");
    return d;
  }

  const json& array(const std::string& field) const {
    const json& v = require(field);
    if (!v.is_array()) fail(field, "expected an array");
    return v;
  }

  FieldReader child(const json& obj, const std::string& prefix) const {
    return FieldReader(obj, origin_, line_, prefix_ + prefix);
  }

  std::size_t line() const { return line_; }

 private:
  const json& obj_;
  std::string origin_;
  std::size_t line_;
  std::string prefix_;
};

json parse_json_line(const std::string& text, const std::string& origin, std::size_t line) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(origin, line, "<json>", e.what());
  }
}

template <typename Fn>
void for_each_line(const std::string& text, Fn&& fn) {
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    ++lineno;
    std::string line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) fn(line, lineno);
    pos = nl + 1;
  }
}

std::uint16_t read_u16(const std::string& b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    (static_cast<unsigned char>(b[at + 1]) << 8));
}
std::uint32_t read_u32(const std::string& b, std::size_t at) {
  return static_cast<std::uint32_t>(read_u16(b, at)) | (static_cast<std::uint32_t>(read_u16(b, at + 2)) << 16);
}
void put_u16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}
void put_u32(std::string& b, std::uint32_t v) {
  put_u16(b, static_cast<std::uint16_t>(v & 0xffff));
  put_u16(b, static_cast<std::uint16_t>(v >> 16));
}

AudioBuffer decode_wav(const std::string& bytes, const std::string& origin) {
  auto bad = [&](const std::string& field, const std::string& detail) -> SchemaError {
    return SchemaError(origin, 1, field, detail);
  };
  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0)
    throw bad("riff", "not a RIFF/WAVE file");
  std::size_t pos = 12;
  bool have_fmt = false;
  AudioBuffer audio;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw bad(id, "chunk overruns file");
    if (id == "fmt ") {
      if (size < 16) throw bad("fmt", "chunk too small");
      if (read_u16(bytes, body) != 1) throw bad("audio_format", "only PCM is supported");
      if (read_u16(bytes, body + 2) != 1) throw bad("channels", "audio must be mono");
      audio.sample_rate = static_cast<int>(read_u32(bytes, body + 4));
      if (read_u16(bytes, body + 14) != 16) throw bad("bits_per_sample", "audio must be 16-bit");
      if (audio.sample_rate < 16000) throw bad("sample_rate", "must be at least 16000 Hz");
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw bad("fmt", "data chunk before fmt chunk");
      const std::size_t n = size / 2;
      audio.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16(bytes, body + 2 * i));
        audio.samples[i] = static_cast<float>(raw) / 32768.0f;
      }
      return audio;
    }
    pos = body + size + (size & 1);
  }
  throw bad("data", "missing data chunk");
}

std::string encode_wav(const AudioBuffer& audio) {
  const auto data_bytes = static_cast<std::uint32_t>(audio.samples.size() * 2);
  std::string b;
  b.reserve(44 + data_bytes);
  b += "RIFF";
  put_u32(b, 36 + data_bytes);
  b += "WAVEfmt ";
  put_u32(b, 16);
  put_u16(b, 1);
  put_u16(b, 1);
  put_u32(b, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(b, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  put_u16(b, 2);
  put_u16(b, 16);
  b += "data";
  put_u32(b, data_bytes);
  for (float s : audio.samples) {
    const double scaled = std::round(static_cast<double>(s) * 32768.0);
    put_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0))));
  }
  return b;
}

std::string stats_header() {
  std::string h = "minute_ts";
  for (auto name : kMetricNames) {
    h += ',';
    h += name;
  }
  return h;
}

void validate_manifest(const SessionManifest& m, const std::string& origin) {
  auto fail = [&](const std::string& field, const std::string& detail) {
    throw SchemaError(origin, 1, field, detail);
  };
  if (m.session_id.empty()) fail("session_id", "empty");
  if (m.start_ts >= m.end_ts) fail("end_ts", "start_ts must precede end_ts");
  for (std::size_t s = 0; s < m.streamers.size(); ++s) {
    const auto& st = m.streamers[s];
    const std::string prefix = "streamers[" + std::to_string(s) + "].";
    if (st.streamer_id.empty()) fail(prefix + "streamer_id", "empty");
    std::vector<Shift> shifts = st.shifts;
    for (const auto& sh : shifts) {
      if (sh.start >= sh.end) fail(prefix + "shifts", "shift start must precede its end");
      if (sh.start < m.start_ts || sh.end > m.end_ts) fail(prefix + "shifts", "shift outside session");
    }
    std::sort(shifts.begin(), shifts.end(), [](auto& a, auto& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < shifts.size(); ++i)
      if (shifts[i].start < shifts[i - 1].end) fail(prefix + "shifts", "overlapping shifts");
  }
  std::set<int> closed_batches;
  for (std::size_t i = 0; i < m.merchandise.size(); ++i) {
    const auto& e = m.merchandise[i];
    const std::string prefix = "merchandise[" + std::to_string(i) + "].";
    if (e.merchandise_id.empty()) fail(prefix + "merchandise_id", "empty");
    if (!(e.price > 0.0)) fail(prefix + "price", "must be positive");
    if (e.batch_id < 0) fail(prefix + "batch_id", "must be non-negative");
    if (e.launch_ts < m.start_ts || e.launch_ts >= m.end_ts) fail(prefix + "launch_ts", "outside session");
    if (i > 0) {
      const auto& prev = m.merchandise[i - 1];
      if (e.launch_ts <= prev.launch_ts) fail(prefix + "launch_ts", "launch times must be strictly increasing");
      if (e.batch_id != prev.batch_id) {
        closed_batches.insert(prev.batch_id);
        if (closed_batches.count(e.batch_id)) fail(prefix + "batch_id", "batch is not time-contiguous");
      }
    }
  }
}

}  // namespace

std::optional<Metric> metric_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kMetricCount; ++i)
    if (kMetricNames[i] == name) return static_cast<Metric>(i);
  return std::nullopt;
}

std::string make_clip_id(const std::string& session_id, int batch_id) {
  return session_id + "_b" + std::to_string(batch_id);
}

AudioBuffer read_wav(const fs::path& path) { return decode_wav(read_file(path), path.string()); }

void write_wav(const fs::path& path, const AudioBuffer& audio) { write_file(path, encode_wav(audio)); }

SessionManifest parse_manifest(const std::string& json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(origin, 1, "<json>", e.what());
  }
  FieldReader r(doc, origin, 1);
  SessionManifest m;
  m.session_id = r.string("session_id");
  m.start_ts = r.integer("start_ts");
  m.end_ts = r.integer("end_ts");
  const json& streamers = r.array("streamers");
  for (std::size_t i = 0; i < streamers.size(); ++i) {
    FieldReader sr = r.child(streamers[i], "streamers[" + std::to_string(i) + "].");
    Streamer s;
    s.streamer_id = sr.string("streamer_id");
    s.display_name = sr.string("display_name");
    for (const auto& sh : sr.array("shifts")) {
      if (!sh.is_array() || sh.size() != 2 || !sh[0].is_number_integer() || !sh[1].is_number_integer())
        sr.fail("shifts", "each shift must be [start_ts, end_ts]");
      s.shifts.push_back({sh[0].get<EpochSeconds>(), sh[1].get<EpochSeconds>()});
    }
    m.streamers.push_back(std::move(s));
  }
  const json& merch = r.array("merchandise");
  for (std::size_t i = 0; i < merch.size(); ++i) {
    FieldReader mr = r.child(merch[i], "merchandise[" + std::to_string(i) + "].");
    MerchandiseEntry e;
    e.merchandise_id = mr.string("merchandise_id");
    e.title = mr.string("title");
    e.price = mr.number("price");
    e.launch_ts = mr.integer("launch_ts");
    e.batch_id = static_cast<int>(mr.integer("batch_id"));
    e.thumbnail_path = mr.optional_string("thumbnail_path");
    m.merchandise.push_back(std::move(e));
  }
  FieldReader fr = r.child(r.require("files"), "files.");
  m.files.stats = fr.string("stats");
  m.files.transcript = fr.string("transcript");
  m.files.audio = fr.string("audio");
  m.files.frames = fr.string("frames");
  m.files.comments = fr.string("comments");
  m.replay_path = r.optional_string("replay_path");
  validate_manifest(m, origin);
  return m;
}

std::string format_manifest(const SessionManifest& m) {
  json doc;
  doc["format"] = "retrolens.session";
  doc["version"] = 1;
  doc["session_id"] = m.session_id;
  doc["start_ts"] = m.start_ts;
  doc["end_ts"] = m.end_ts;
  doc["streamers"] = json::array();
  for (const auto& s : m.streamers) {
    json shifts = json::array();
    for (const auto& sh : s.shifts) shifts.push_back({sh.start, sh.end});
    doc["streamers"].push_back({{"streamer_id", s.streamer_id}, {"display_name", s.display_name}, {"shifts", shifts}});
  }
  doc["merchandise"] = json::array();
  for (const auto& e : m.merchandise) {
    json j = {{"merchandise_id", e.merchandise_id}, {"title", e.title},       {"price", e.price},
              {"launch_ts", e.launch_ts},           {"batch_id", e.batch_id}};
    if (e.thumbnail_path) j["thumbnail_path"] = *e.thumbnail_path;
    doc["merchandise"].push_back(std::move(j));
  }
  doc["files"] = {{"stats", m.files.stats},
                  {"transcript", m.files.transcript},
                  {"audio", m.files.audio},
                  {"frames", m.files.frames},
                  {"comments", m.files.comments}};
  if (m.replay_path) doc["replay_path"] = *m.replay_path;
  return doc.dump(2) + "\n";
}

std::vector<StatsRow> parse_stats_csv(const std::string& text, const std::string& origin) {
  std::vector<StatsRow> rows;
  std::vector<std::size_t> linenos;
  bool header_seen = false;
  const std::string header = stats_header();
  for_each_line(text, [&](const std::string& line, std::size_t lineno) {
    if (!header_seen) {
      if (line != header) throw SchemaError(origin, lineno, "header", "expected '" + header + "'");
      header_seen = true;
      return;
    }
    std::vector<std::string_view> cells;
    std::string_view rest(line);
    while (true) {
      auto comma = rest.find(',');
      cells.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (cells.size() != kMetricCount + 1)
      throw SchemaError(origin, lineno, "columns", "expected " + std::to_string(kMetricCount + 1) + " columns");
    StatsRow row;
    {
      auto c = cells[0];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), row.minute_ts);
      if (ec != std::errc() || ptr != c.data() + c.size())
        throw SchemaError(origin, lineno, "minute_ts", "not an integer");
      if (row.minute_ts % 60 != 0) throw SchemaError(origin, lineno, "minute_ts", "not aligned to a minute");
    }
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      auto c = cells[m + 1];
      const std::string field(kMetricNames[m]);
      double v = 0;
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v))
        throw SchemaError(origin, lineno, field, "not a number");
      if (is_ratio(static_cast<Metric>(m))) {
        if (v < 0.0 || v > 1.0) throw SchemaError(origin, lineno, field, "ratio outside [0, 1]", ErrorCode::kRatioOutOfRange);
      } else if (v < 0.0) {
        throw SchemaError(origin, lineno, field, "must be non-negative");
      }
      row.values[m] = v;
    }
    rows.push_back(row);
    linenos.push_back(lineno);
  });
  if (!header_seen) throw SchemaError(origin, 1, "header", "empty statistics file");
  // Ordering is checked over the whole file first so that a swapped pair
  // reads as unsorted rather than as a stride gap.
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].minute_ts <= rows[i - 1].minute_ts)
      throw SchemaError(origin, linenos[i], "minute_ts", "rows out of order", ErrorCode::kUnsortedStream);
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].minute_ts - rows[i - 1].minute_ts != 60)
      throw SchemaError(origin, linenos[i], "stride", "consecutive rows must be 60 s apart");
  return rows;
}

std::string format_stats_csv(const std::vector<StatsRow>& rows) {
  std::string out = stats_header() + "\n";
  for (const auto& row : rows) {
    out += std::to_string(row.minute_ts);
    for (double v : row.values) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::vector<TranscriptSentence> parse_transcript(const std::string& text, const std::string& origin) {
  std::vector<TranscriptSentence> out;
  for_each_line(text, [&](const std::string& line, std::size_t lineno) {
    json j = parse_json_line(line, origin, lineno);
    FieldReader r(j, origin, lineno);
    TranscriptSentence s;
    s.start_ms = r.integer("start_ms");
    s.end_ms = r.integer("end_ms");
    s.text = r.string("text");
    s.streamer_id = r.string("streamer_id");
    if (s.start_ms < 0) r.fail("start_ms", "negative");
    if (s.start_ms >= s.end_ms) r.fail("end_ms", "start_ms must precede end_ms");
    if (trim(s.text).empty()) r.fail("text", "empty after trimming");
    if (!out.empty() && s.start_ms < out.back().start_ms)
      r.fail("start_ms", "sentences not sorted by start", ErrorCode::kUnsortedStream);
    out.push_back(std::move(s));
  });
  return out;
}

std::vector<FrameAnnotation> parse_frames(const std::string& text, const std::string& origin) {
  std::vector<FrameAnnotation> out;
  for_each_line(text, [&](const std::string& line, std::size_t lineno) {
    json j = parse_json_line(line, origin, lineno);
    FieldReader r(j, origin, lineno);
    FrameAnnotation f;
    f.ts_ms = r.integer("ts_ms");
    f.frame_w = static_cast<int>(r.integer("frame_w"));
    f.frame_h = static_cast<int>(r.integer("frame_h"));
    if (f.ts_ms < 0) r.fail("ts_ms", "negative");
    if (f.frame_w <= 0) r.fail("frame_w", "must be positive");
    if (f.frame_h <= 0) r.fail("frame_h", "must be positive");
    const json& faces = r.array("faces");
    for (std::size_t i = 0; i < faces.size(); ++i) {
      FieldReader fr = r.child(faces[i], "faces[" + std::to_string(i) + "].");
      Face face;
      const json& bbox = fr.array("bbox");
      if (bbox.size() != 4) fr.fail("bbox", "expected [x, y, w, h]");
      for (const auto& v : bbox)
        if (!v.is_number()) fr.fail("bbox", "expected numbers");
      face.bbox = {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(), bbox[3].get<double>()};
      const auto& b = face.bbox;
      if (b.w <= 0 || b.h <= 0 || b.x < 0 || b.y < 0 || b.x + b.w > f.frame_w || b.y + b.h > f.frame_h)
        fr.fail("bbox", "box must lie inside the frame");
      const json& probs = fr.array("expr_probs");
      if (probs.size() != kExpressionCount) fr.fail("expr_probs", "expected 7 probabilities");
      double sum = 0.0;
      for (std::size_t k = 0; k < kExpressionCount; ++k) {
        if (!probs[k].is_number()) fr.fail("expr_probs", "expected numbers");
        face.expr_probs[k] = probs[k].get<double>();
        if (face.expr_probs[k] < 0.0 || face.expr_probs[k] > 1.0) fr.fail("expr_probs", "probability outside [0, 1]");
        sum += face.expr_probs[k];
      }
      if (std::abs(sum - 1.0) > kProbTolerance) fr.fail("expr_probs", "probabilities must sum to 1");
      f.faces.push_back(face);
    }
    if (!out.empty() && f.ts_ms < out.back().ts_ms)
      r.fail("ts_ms", "frames not sorted", ErrorCode::kUnsortedStream);
    out.push_back(std::move(f));
  });
  return out;
}

std::vector<CommentEvent> parse_comments(const std::string& text, const std::string& origin) {
  std::vector<CommentEvent> out;
  for_each_line(text, [&](const std::string& line, std::size_t lineno) {
    json j = parse_json_line(line, origin, lineno);
    FieldReader r(j, origin, lineno);
    CommentEvent c;
    c.ts_ms = r.integer("ts_ms");
    c.user_id = r.string("user_id");
    c.text = r.string("text");
    if (c.ts_ms < 0) r.fail("ts_ms", "negative");
    if (trim(c.text).empty()) r.fail("text", "empty after trimming");
    if (!out.empty() && c.ts_ms < out.back().ts_ms)
      r.fail("ts_ms", "comments not sorted", ErrorCode::kUnsortedStream);
    out.push_back(std::move(c));
  });
  return out;
}

std::shared_ptr<const SessionCorpus> load_session(const fs::path& manifest_path) {
  fs::path manifest_file = manifest_path;
  if (fs::is_directory(manifest_file)) manifest_file /= "manifest.json";
  if (!fs::exists(manifest_file)) throw Error(ErrorCode::kMissingFile, "manifest not found: " + manifest_file.string());

  auto corpus = std::make_shared<SessionCorpus>();
  corpus->directory = manifest_file.parent_path();
  Fnv1a hash;

  auto load = [&](const std::string& rel) {
    const fs::path p = corpus->directory / rel;
    if (!fs::exists(p)) throw Error(ErrorCode::kMissingFile, "referenced file not found: " + p.string());
    std::string bytes = read_file(p);
    hash.update(rel).update_value(bytes.size()).update(bytes);
    return std::make_pair(bytes, p.string());
  };

  {
    std::string text = read_file(manifest_file);
    hash.update(text);
    corpus->manifest = parse_manifest(text, manifest_file.string());
  }
  const auto& files = corpus->manifest.files;
  {
    auto [bytes, origin] = load(files.stats);
    corpus->stats = parse_stats_csv(bytes, origin);
    for (const auto& row : corpus->stats)
      if (!corpus->manifest.span().contains(row.minute_ts))
        throw SchemaError(origin, 0, "minute_ts", "row " + std::to_string(row.minute_ts) + " outside session");
  }
  {
    auto [bytes, origin] = load(files.transcript);
    corpus->transcript = parse_transcript(bytes, origin);
  }
  {
    auto [bytes, origin] = load(files.frames);
    corpus->frames = parse_frames(bytes, origin);
  }
  {
    auto [bytes, origin] = load(files.comments);
    corpus->comments = parse_comments(bytes, origin);
  }
  {
    auto [bytes, origin] = load(files.audio);
    corpus->audio = decode_wav(bytes, origin);
  }
  corpus->source_hash = hash.digest();
  return corpus;
}

fs::path save_session(const SessionCorpus& corpus, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + directory.string() + ": " + ec.message());
  const auto& m = corpus.manifest;
  write_file(directory / "manifest.json", format_manifest(m));
  write_file(directory / m.files.stats, format_stats_csv(corpus.stats));

  std::string transcript;
  for (const auto& s : corpus.transcript)
    transcript += json{{"start_ms", s.start_ms}, {"end_ms", s.end_ms}, {"text", s.text}, {"streamer_id", s.streamer_id}}
                      .dump() + "\n";
  write_file(directory / m.files.transcript, transcript);

  std::string frames;
  for (const auto& f : corpus.frames) {
    json faces = json::array();
    for (const auto& face : f.faces)
      faces.push_back({{"bbox", {face.bbox.x, face.bbox.y, face.bbox.w, face.bbox.h}}, {"expr_probs", face.expr_probs}});
    frames += json{{"ts_ms", f.ts_ms}, {"frame_w", f.frame_w}, {"frame_h", f.frame_h}, {"faces", faces}}.dump() + "\n";
  }
  write_file(directory / m.files.frames, frames);

  std::string comments;
  for (const auto& c : corpus.comments)
    comments += json{{"ts_ms", c.ts_ms}, {"user_id", c.user_id}, {"text", c.text}}.dump() + "\n";
  write_file(directory / m.files.comments, comments);

  write_wav(directory / m.files.audio, corpus.audio);
  return directory / "manifest.json";
}

std::vector<Clip> segment_clips(const SessionCorpus& corpus) {
  const auto& m = corpus.manifest;
  std::vector<Clip> clips;
  for (const auto& e : m.merchandise) {
    if (clips.empty() || clips.back().batch_id != e.batch_id) {
      if (!clips.empty()) clips.back().span.end = e.launch_ts;
      Clip c;
      c.session_id = m.session_id;
      c.batch_id = e.batch_id;
      c.clip_id = make_clip_id(m.session_id, e.batch_id);
      c.span = {e.launch_ts, m.end_ts};
      clips.push_back(std::move(c));
    }
    clips.back().merchandise_ids.push_back(e.merchandise_id);
  }
  return clips;
}

}  // namespace retrolens::corpus
