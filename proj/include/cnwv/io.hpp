// Copyright 2026 The cnwv Authors. All Rights Reserved.
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

// Embedding files and benchmark datasets.
//
// word2vec binary:
//   "<count> <dim>\n", then per entry: token bytes, one 0x20, dim
//   little-endian IEEE-754 float32 values, optionally one 0x0A.
// GloVe text:
//   one line per entry, token then dim decimal values, single-space separated.
// Benchmarks are tab-separated UTF-8; lines starting with '#' and blank lines
// are skipped.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cnwv/embedding.hpp"
#include "cnwv/error.hpp"

namespace cnwv {

enum class EmbeddingFormat { Word2vecBinary, GloveText };

struct LoadReport {
  std::size_t records = 0;     // entries read from the file
  std::size_t duplicates = 0;  // entries dropped because the token was already seen
};

template <std::floating_point T>
struct LoadedEmbedding {
  Embedding<T> embedding;
  LoadReport report;
};

struct SimilarityRecord {
  std::string word_a;
  std::string word_b;
  double score;
};
using SimilarityDataset = std::vector<SimilarityRecord>;

struct StsRecord {
  std::vector<std::string> sentence_a;
  std::vector<std::string> sentence_b;
  double score;
};
using StsDataset = std::vector<StsRecord>;

struct CategoryRecord {
  std::string word;
  std::string category;
};

struct CategoryDataset {
  std::vector<CategoryRecord> records;
  /// Distinct categories in order of first appearance.
  std::vector<std::string> categories;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t category_count() const noexcept { return categories.size(); }
};

namespace detail {

inline std::ifstream open_input(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::out | std::ios::binary | std::ios::trunc
                                 : std::ios::out | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
  return out;
}

template <typename Num>
bool parse_number(std::string_view text, Num& value) {
  if (text.empty()) return false;
  // from_chars rejects a leading '+', which some writers emit.
  if (text.front() == '+') text.remove_prefix(1);
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline bool skippable(const std::string& line) {
  return line.empty() || line.front() == '#' ||
         std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

// Accumulates rows while enforcing the first-occurrence-wins duplicate policy.
template <std::floating_point T>
class RowCollector {
 public:
  explicit RowCollector(std::size_t dim, std::size_t expected = 0) : dim_(dim) {
    vocab_.reserve(expected);
    values_.reserve(expected * dim);
    seen_.reserve(expected);
  }

  // `row` must hold dim_ values. Returns false when the token was a duplicate.
  bool add(std::string token, const T* row) {
    ++report_.records;
    if (!seen_.insert(token).second) {
      ++report_.duplicates;
      return false;
    }
    vocab_.push_back(std::move(token));
    values_.insert(values_.end(), row, row + dim_);
    return true;
  }

  LoadedEmbedding<T> finish() && {
    if (vocab_.empty()) throw Error(ErrorCode::EmptyDataset, "embedding file has no entries");
    RowMatrix<T> m = Eigen::Map<const RowMatrix<T>>(
        values_.data(), static_cast<Eigen::Index>(vocab_.size()), static_cast<Eigen::Index>(dim_));
    values_.clear();
    values_.shrink_to_fit();
    return LoadedEmbedding<T>{Embedding<T>(std::move(vocab_), std::move(m)), report_};
  }

 private:
  std::size_t dim_;
  std::vector<std::string> vocab_;
  std::vector<T> values_;
  std::unordered_set<std::string> seen_;
  LoadReport report_;
};

template <std::floating_point T>
LoadedEmbedding<T> read_word2vec_binary(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorCode::MalformedHeader, "missing header line");
  std::uint64_t offset = header.size() + 1;
  strip_cr(header);
  const auto fields = split(header, ' ');
  std::size_t count = 0;
  std::size_t dim = 0;
  if (fields.size() != 2 || !parse_number(fields[0], count) || !parse_number(fields[1], dim) ||
      dim == 0) {
    throw Error(ErrorCode::MalformedHeader, "expected '<count> <dim>', got '" + header + "'");
  }

  RowCollector<T> rows(dim, std::min<std::size_t>(count, std::size_t{1} << 20));
  std::vector<char> raw(dim * 4);
  std::vector<T> row(dim);
  std::string token;
  auto next_byte = [&] {
    const int c = in.get();
    if (c != EOF) ++offset;
    return c;
  };
  for (std::size_t entry = 0; entry < count; ++entry) {
    token.clear();
    // Separator after the previous vector: nothing, or a single newline.
    int c = next_byte();
    if (c == '\n') c = next_byte();
    while (c != EOF && c != ' ') {
      token.push_back(static_cast<char>(c));
      c = next_byte();
    }
    if (c == EOF) {
      throw Error(ErrorCode::TruncatedRecord, "entry " + std::to_string(entry) +
                                                  " ends early at byte offset " +
                                                  std::to_string(offset));
    }
    if (token.empty() || token.find('\n') != std::string::npos) {
      throw Error(ErrorCode::MalformedRecord,
                  "entry " + std::to_string(entry) + " at byte offset " +
                      std::to_string(offset) + " has an invalid token");
    }
    if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size()))) {
      throw Error(ErrorCode::TruncatedRecord,
                  "vector for '" + token + "' truncated at byte offset " +
                      std::to_string(offset + static_cast<std::uint64_t>(in.gcount())));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const auto* b = reinterpret_cast<const unsigned char*>(raw.data() + 4 * j);
      const std::uint32_t bits = std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) |
                                 (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
      const float v = std::bit_cast<float>(bits);
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteValue, "non-finite value in vector for '" + token +
                                                   "' at byte offset " +
                                                   std::to_string(offset + 4 * j));
      }
      row[j] = static_cast<T>(v);
    }
    offset += raw.size();
    rows.add(token, row.data());
  }
  return std::move(rows).finish();
}

template <std::floating_point T>
LoadedEmbedding<T> read_glove_text(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  std::optional<RowCollector<T>> rows;
  std::vector<T> row;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split(line, ' ');
    if (!rows) {
      dim = fields.size() - 1;
      if (dim == 0) {
        throw Error(ErrorCode::InconsistentDim, "line 1 has no values");
      }
      rows.emplace(dim);
      row.resize(dim);
    }
    if (fields.size() - 1 != dim) {
      throw Error(ErrorCode::InconsistentDim, "line " + std::to_string(line_no) + " has " +
                                                  std::to_string(fields.size() - 1) +
                                                  " values, expected " + std::to_string(dim));
    }
    if (fields[0].empty()) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + " has an empty token");
    }
    for (std::size_t j = 0; j < dim; ++j) {
      if (!parse_number(fields[j + 1], row[j])) {
        throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) +
                                                    ": cannot parse '" +
                                                    std::string(fields[j + 1]) + "'");
      }
      if (!std::isfinite(row[j])) {
        throw Error(ErrorCode::NonFiniteValue, "line " + std::to_string(line_no) +
                                                   " has a non-finite value");
      }
    }
    rows->add(std::string(fields[0]), row.data());
  }
  if (!rows) throw Error(ErrorCode::EmptyDataset, "embedding file has no entries");
  return std::move(*rows).finish();
}

inline void check_token(const std::string& token, EmbeddingFormat format) {
  const bool bad = token.empty() || token.find(' ') != std::string::npos ||
                   token.find('\n') != std::string::npos ||
                   (format == EmbeddingFormat::GloveText && token.find('\r') != std::string::npos);
  if (bad) {
    throw Error(ErrorCode::UnencodableToken, "token '" + token + "' cannot be written");
  }
}

template <typename Num>
void append_number(std::string& out, Num value) {
  std::array<char, 64> buf;
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), ptr);
}

}  // namespace detail

/// Streams an embedding file into memory; only one row buffer is held besides
/// the growing result. Duplicate tokens keep their first vector.
template <std::floating_point T = float>
LoadedEmbedding<T> read_embedding(const std::filesystem::path& path, EmbeddingFormat format) {
  auto in = detail::open_input(path, format == EmbeddingFormat::Word2vecBinary);
  return format == EmbeddingFormat::Word2vecBinary ? detail::read_word2vec_binary<T>(in)
                                                   : detail::read_glove_text<T>(in);
}

/// Binary output stores float32, so it round-trips exactly for float
/// embeddings. Text output uses the shortest representation that parses back
/// to the same T.
template <std::floating_point T>
void write_embedding(const Embedding<T>& emb, std::ostream& out, EmbeddingFormat format) {
  for (const auto& token : emb.vocab()) detail::check_token(token, format);
  const std::size_t n = emb.dim();
  if (format == EmbeddingFormat::Word2vecBinary) {
    out << emb.size() << ' ' << n << '\n';
    std::vector<char> raw(n * 4);
    for (std::size_t i = 0; i < emb.size(); ++i) {
      out << emb.vocab()[i] << ' ';
      const auto row = emb.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(row(j)));
        raw[4 * j] = static_cast<char>(bits & 0xFF);
        raw[4 * j + 1] = static_cast<char>((bits >> 8) & 0xFF);
        raw[4 * j + 2] = static_cast<char>((bits >> 16) & 0xFF);
        raw[4 * j + 3] = static_cast<char>((bits >> 24) & 0xFF);
      }
      out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
      out << '\n';
    }
  } else {
    std::string line;
    for (std::size_t i = 0; i < emb.size(); ++i) {
      line = emb.vocab()[i];
      const auto row = emb.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        line.push_back(' ');
        detail::append_number(line, row(j));
      }
      line.push_back('\n');
      out << line;
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write failed");
}

template <std::floating_point T>
void write_embedding(const Embedding<T>& emb, const std::filesystem::path& path,
                     EmbeddingFormat format) {
  // Validate before truncating an existing file.
  for (const auto& token : emb.vocab()) detail::check_token(token, format);
  auto out = detail::open_output(path, format == EmbeddingFormat::Word2vecBinary);
  write_embedding(emb, out, format);
  out.close();
  if (!out) throw Error(ErrorCode::Io, "cannot finish writing '" + path.string() + "'");
}

/// Lowercases, splits on whitespace and strips leading/trailing ASCII
/// punctuation from each token; tokens left empty are dropped.
inline std::vector<std::string> tokenize_sentence(std::string_view sentence) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && std::isspace(static_cast<unsigned char>(sentence[i]))) ++i;
    std::size_t j = i;
    while (j < sentence.size() && !std::isspace(static_cast<unsigned char>(sentence[j]))) ++j;
    std::string_view word = sentence.substr(i, j - i);
    while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.front()))) {
      word.remove_prefix(1);
    }
    while (!word.empty() && std::ispunct(static_cast<unsigned char>(word.back()))) {
      word.remove_suffix(1);
    }
    if (!word.empty()) {
      std::string token(word);
      for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

namespace detail {

// Calls fn(fields, line_no) for every non-skippable line, requiring exactly
// `columns` tab-separated fields.
template <typename Fn>
void for_each_tsv_line(std::istream& in, std::size_t columns, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (skippable(line)) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != columns) {
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": expected " +
                                                std::to_string(columns) + " tab-separated fields");
    }
    fn(fields, line_no);
  }
}

inline double parse_score(std::string_view field, std::size_t line_no) {
  double score = 0.0;
  if (!parse_number(field, score) || !std::isfinite(score)) {
    throw Error(ErrorCode::MalformedLine,
                "line " + std::to_string(line_no) + ": bad score '" + std::string(field) + "'");
  }
  return score;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline void require_nonempty(std::size_t size, const std::filesystem::path& path) {
  if (size == 0) throw Error(ErrorCode::EmptyDataset, "'" + path.string() + "' has no records");
}

}  // namespace detail

inline SimilarityDataset read_similarity_dataset(std::istream& in) {
  SimilarityDataset ds;
  detail::for_each_tsv_line(in, 3, [&](const auto& f, std::size_t line_no) {
    const auto a = detail::trim(f[0]);
    const auto b = detail::trim(f[1]);
    if (a.empty() || b.empty()) {
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": empty word");
    }
    ds.push_back({std::string(a), std::string(b), detail::parse_score(detail::trim(f[2]), line_no)});
  });
  return ds;
}

inline SimilarityDataset read_similarity_dataset(const std::filesystem::path& path) {
  auto in = detail::open_input(path, false);
  auto ds = read_similarity_dataset(in);
  detail::require_nonempty(ds.size(), path);
  return ds;
}

inline StsDataset read_sts_dataset(std::istream& in) {
  StsDataset ds;
  detail::for_each_tsv_line(in, 3, [&](const auto& f, std::size_t line_no) {
    StsRecord rec{tokenize_sentence(f[0]), tokenize_sentence(f[1]),
                  detail::parse_score(detail::trim(f[2]), line_no)};
    if (rec.sentence_a.empty() || rec.sentence_b.empty()) {
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": sentence is empty after tokenization");
    }
    ds.push_back(std::move(rec));
  });
  return ds;
}

inline StsDataset read_sts_dataset(const std::filesystem::path& path) {
  auto in = detail::open_input(path, false);
  auto ds = read_sts_dataset(in);
  detail::require_nonempty(ds.size(), path);
  return ds;
}

inline CategoryDataset read_category_dataset(std::istream& in) {
  CategoryDataset ds;
  std::unordered_set<std::string> words;
  std::unordered_set<std::string> cats;
  detail::for_each_tsv_line(in, 2, [&](const auto& f, std::size_t line_no) {
    std::string word(detail::trim(f[0]));
    std::string cat(detail::trim(f[1]));
    if (word.empty() || cat.empty()) {
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": empty field");
    }
    if (!words.insert(word).second) {
      throw Error(ErrorCode::MalformedLine,
                  "line " + std::to_string(line_no) + ": word '" + word + "' listed twice");
    }
    if (cats.insert(cat).second) ds.categories.push_back(cat);
    ds.records.push_back({std::move(word), std::move(cat)});
  });
  return ds;
}

inline CategoryDataset read_category_dataset(const std::filesystem::path& path) {
  auto in = detail::open_input(path, false);
  auto ds = read_category_dataset(in);
  detail::require_nonempty(ds.size(), path);
  if (ds.category_count() < 2) {
    throw Error(ErrorCode::DegenerateInput, "'" + path.string() + "' has fewer than 2 categories");
  }
  return ds;
}

/// One token per line. Anything after the first whitespace is ignored, so
/// "word count" frequency lists load directly.
inline std::vector<std::string> read_token_list(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    detail::strip_cr(line);
    if (detail::skippable(line)) continue;
    const auto t = detail::trim(line);
    const auto end = std::find_if(t.begin(), t.end(),
                                  [](unsigned char c) { return std::isspace(c); });
    tokens.emplace_back(t.begin(), end);
  }
  return tokens;
}

inline std::vector<std::string> read_token_list(const std::filesystem::path& path) {
  auto in = detail::open_input(path, false);
  auto tokens = read_token_list(in);
  detail::require_nonempty(tokens.size(), path);
  return tokens;
}

}  // namespace cnwv
