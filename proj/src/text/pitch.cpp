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

#include "retrolens/text/pitch.hpp"

#include <cctype>

#include "json.hpp"
#include "retrolens/error.hpp"

namespace retrolens::text {
namespace {

// Decodes one UTF-8 code point starting at `i`, advancing `i`. Malformed
// bytes decode as U+FFFD and consume one byte.
char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    i += 1;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0) {
    int c1 = cont(1);
    if (c1 >= 0) {
      i += 2;
      return static_cast<char32_t>(((b0 & 0x1F) << 6) | c1);
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      i += 3;
      return static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2);
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      i += 4;
      return static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3);
    }
  }
  i += 1;
  return U'�';
}

bool is_cjk(char32_t c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) || (c >= 0x20000 && c <= 0x2A6DF) ||
         (c >= 0xF900 && c <= 0xFAFF);
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

struct Scan {
  std::vector<std::string> tokens;
  std::size_t words = 0;
};

Scan scan(std::string_view text) {
  Scan out;
  std::string word;
  std::vector<char32_t> cjk_run;
  auto flush_word = [&] {
    if (!word.empty()) {
      out.tokens.push_back(std::move(word));
      word.clear();
      ++out.words;
    }
  };
  auto flush_cjk = [&] {
    if (cjk_run.empty()) return;
    out.words += cjk_run.size();
    if (cjk_run.size() == 1) {
      std::string t;
      append_utf8(t, cjk_run[0]);
      out.tokens.push_back(std::move(t));
    } else {
      for (std::size_t k = 0; k + 1 < cjk_run.size(); ++k) {
        std::string t;
        append_utf8(t, cjk_run[k]);
        append_utf8(t, cjk_run[k + 1]);
        out.tokens.push_back(std::move(t));
      }
    }
    cjk_run.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t c = next_code_point(text, i);
    if (c < 0x80 && std::isalnum(static_cast<int>(c))) {
      flush_cjk();
      word.push_back(static_cast<char>(std::tolower(static_cast<int>(c))));
    } else if (c == U'\'' && !word.empty()) {
      // Apostrophes inside words ("don't") are dropped rather than splitting.
    } else if (is_cjk(c)) {
      flush_word();
      cjk_run.push_back(c);
    } else {
      flush_word();
      flush_cjk();
    }
  }
  flush_word();
  flush_cjk();
  return out;
}

}  // namespace

std::optional<PitchCategory> category_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryCount; ++i)
    if (kCategoryNames[i] == name) return static_cast<PitchCategory>(i);
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) { return scan(text).tokens; }

std::size_t word_count(std::string_view text) { return scan(text).words; }

bool is_complete_sentence(std::string_view text) { return scan(text).tokens.size() >= 2; }

std::vector<LabeledSentence> read_labeled_jsonl(const std::string& text, const std::string& origin) {
  std::vector<LabeledSentence> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    ++lineno;
    const std::string line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(origin, lineno, "<json>", e.what());
    }
    if (!j.contains("text") || !j["text"].is_string()) throw SchemaError(origin, lineno, "text", "missing string");
    if (!j.contains("label") || !j["label"].is_string()) throw SchemaError(origin, lineno, "label", "missing string");
    auto label = category_from_name(j["label"].get<std::string>());
    if (!label) throw SchemaError(origin, lineno, "label", "unknown category " + j["label"].get<std::string>());
    LabeledSentence s{j["text"].get<std::string>(), *label};
    if (s.text.find_first_not_of(" \t\r\n") == std::string::npos) throw SchemaError(origin, lineno, "text", "empty");
    out.push_back(std::move(s));
  }
  return out;
}

std::string write_labeled_jsonl(const std::vector<LabeledSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences)
    out += nlohmann::json{{"text", s.text}, {"label", std::string(category_name(s.label))}}.dump() + "\n";
  return out;
}

}  // namespace retrolens::text
