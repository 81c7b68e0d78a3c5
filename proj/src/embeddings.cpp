#include "vlawe/embeddings.hpp"

#include <cctype>
#include <fstream>
#include <istream>

namespace vlawe {

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw ConfigError("embedding dimension must be positive");
}

std::span<const double> EmbeddingTable::lookup(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return {};
  return {values_.data() + it->second * dimension_, dimension_};
}

bool EmbeddingTable::contains(std::string_view word) const { return index_.contains(word); }

void EmbeddingTable::insert(std::string word, std::span<const double> vector) {
  if (dimension_ == 0) throw ConfigError("insert into a table with no dimension");
  if (vector.size() != dimension_) {
    throw DataError("vector for '" + word + "' has " + std::to_string(vector.size()) +
                    " components, expected " + std::to_string(dimension_));
  }
  if (index_.contains(word)) throw DataError("duplicate word '" + word + "'");
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  values_.insert(values_.end(), vector.begin(), vector.end());
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

}  // namespace

EmbeddingTable load_table(std::istream& in, const LoadOptions& options) {
  if (options.expected_dim && *options.expected_dim == 0) {
    throw ConfigError("expected_dim must be positive");
  }
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = options.expected_dim.value_or(0);
  bool any_row = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::size_t components = fields.size() - 1;
    if (!any_row && dim == 0) dim = components;
    std::string key(fields[0]);
    if (options.allow_multiword_keys && dim > 0 && components > dim) {
      const std::size_t key_fields = fields.size() - dim;
      for (std::size_t j = 1; j < key_fields; ++j) {
        key.push_back(' ');
        key.append(fields[j]);
      }
      fields.erase(fields.begin() + 1, fields.begin() + static_cast<std::ptrdiff_t>(key_fields));
      components = dim;
    }
    if (components != dim || components == 0) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                      " components, found " + std::to_string(components));
    }
    if (!any_row) {
      table = EmbeddingTable(dim);
      any_row = true;
    }
    if (options.keep_words && !options.keep_words->contains(key)) continue;
    values.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      try {
        values[j] = parse_double(fields[j + 1]);
      } catch (const DataError& e) {
        throw DataError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    try {
      table.insert(std::move(key), values);
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!any_row) throw DataError("embedding file is empty");
  return table;
}

EmbeddingTable load_table(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  try {
    return load_table(in, options);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

TokenizedDocument tokenize(std::string_view text, std::string source_id) {
  TokenizedDocument doc;
  doc.source_id = std::move(source_id);
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      doc.tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) doc.tokens.push_back(std::move(current));
  return doc;
}

ResolvedDocument resolve(const TokenizedDocument& doc, const EmbeddingTable& table) {
  ResolvedDocument out;
  out.document.source_id = doc.source_id;
  out.document.tokens = doc.tokens;
  std::vector<std::string> known;
  Matrix vectors(0, table.dimension());
  for (const auto& token : doc.tokens) {
    auto v = table.lookup(token);
    if (v.empty()) {
      ++out.oov_count;
      continue;
    }
    known.push_back(token);
    vectors.append_row(v);
  }
  out.document.known_tokens = std::move(known);
  out.vectors = std::move(vectors);
  return out;
}

}  // namespace vlawe
