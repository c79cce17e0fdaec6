#include "tableforge/tag.hpp"

#include <cctype>

#include "tableforge/error.hpp"

namespace tableforge {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_meta(char c) { return c == '>' || c == '@' || c == ':' || c == '"'; }

class PathParser {
 public:
  PathParser(std::string_view text, std::size_t pos) : text_(text), pos_(pos) {}

  // Parses a path, stopping at end of input or at an unquoted '@' when
  // `stop_at_at` is set.
  Path parse(bool stop_at_at) {
    Path path;
    while (true) {
      path.push_back(segment());
      if (pos_ >= text_.size()) break;
      const char c = text_[pos_];
      if (c == '>') {
        ++pos_;
        continue;
      }
      if (c == '@' && stop_at_at) break;
      throw Error(ErrorCode::kParseError, std::string("unexpected '") + c + "'", pos_);
    }
    return path;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string segment() {
    skip_space();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '"') {
      std::string out;
      ++pos_;
      while (true) {
        if (pos_ >= text_.size()) throw Error(ErrorCode::kParseError, "unbalanced quote", start);
        const char c = text_[pos_];
        if (c == '"') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
            out.push_back('"');
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        out.push_back(c);
        ++pos_;
      }
      skip_space();
      if (out.empty()) throw Error(ErrorCode::kParseError, "empty segment", start);
      if (pos_ < text_.size() && text_[pos_] != '>' && text_[pos_] != '@') {
        throw Error(ErrorCode::kParseError, "text after closing quote", pos_);
      }
      return out;
    }
    while (pos_ < text_.size() && !is_meta(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == '"' || text_[pos_] == ':')) {
      throw Error(ErrorCode::kParseError, std::string("unexpected '") + text_[pos_] + "' in segment", pos_);
    }
    std::string out = trim(text_.substr(start, pos_ - start));
    if (out.empty()) throw Error(ErrorCode::kParseError, "empty segment", start);
    return out;
  }

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_;
};

std::string quote_segment(const std::string& segment) {
  bool needs = segment.empty() || is_space(segment.front()) || is_space(segment.back());
  for (char c : segment) needs = needs || is_meta(c);
  if (!needs) return segment;
  std::string out = "\"";
  for (char c : segment) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_path(const Path& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '>';
    out += quote_segment(path[i]);
  }
  return out;
}

}  // namespace

std::string_view kind_keyword(TagKind kind) {
  switch (kind) {
    case TagKind::kRowExtract: return "row";
    case TagKind::kColExtract: return "col";
    case TagKind::kCellIntersect: return "cell";
    case TagKind::kColHeadRef: return "colhead";
    case TagKind::kRowHeadRef: return "rowhead";
  }
  return "cell";
}

SemanticTag parse_tag(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::kParseError, "missing ':' after tag kind", text.size());
  const std::string keyword = trim(text.substr(0, colon));
  SemanticTag tag;
  if (keyword == "row") {
    tag.kind = TagKind::kRowExtract;
  } else if (keyword == "col") {
    tag.kind = TagKind::kColExtract;
  } else if (keyword == "cell") {
    tag.kind = TagKind::kCellIntersect;
  } else if (keyword == "colhead") {
    tag.kind = TagKind::kColHeadRef;
  } else if (keyword == "rowhead") {
    tag.kind = TagKind::kRowHeadRef;
  } else {
    throw Error(ErrorCode::kParseError, "unknown tag kind '" + keyword + "'", 0);
  }

  PathParser parser(text, colon + 1);
  switch (tag.kind) {
    case TagKind::kCellIntersect: {
      tag.col_path = parser.parse(true);
      if (parser.pos() >= text.size()) {
        throw Error(ErrorCode::kParseError, "cell tag needs '@' between column and row paths", text.size());
      }
      PathParser rows(text, parser.pos() + 1);
      tag.row_path = rows.parse(false);
      break;
    }
    case TagKind::kRowExtract:
    case TagKind::kRowHeadRef:
      tag.row_path = parser.parse(false);
      break;
    case TagKind::kColExtract:
    case TagKind::kColHeadRef:
      tag.col_path = parser.parse(false);
      break;
  }
  return tag;
}

std::string format_tag(const SemanticTag& tag) {
  std::string out(kind_keyword(tag.kind));
  out += ':';
  switch (tag.kind) {
    case TagKind::kCellIntersect:
      out += format_path(*tag.col_path) + "@" + format_path(*tag.row_path);
      break;
    case TagKind::kRowExtract:
    case TagKind::kRowHeadRef:
      out += format_path(*tag.row_path);
      break;
    case TagKind::kColExtract:
    case TagKind::kColHeadRef:
      out += format_path(*tag.col_path);
      break;
  }
  return out;
}

}  // namespace tableforge
