#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "tableforge/table.hpp"

namespace tableforge {

enum class TagKind { kRowExtract, kColExtract, kCellIntersect, kColHeadRef, kRowHeadRef };

// Parsed selection expression.
//
//   tag     := kind ":" body
//   kind    := "row" | "col" | "cell" | "colhead" | "rowhead"
//   body    := path                   (row, col, colhead, rowhead)
//            | path "@" path          (cell: column path "@" row path)
//   path    := segment (">" segment)*
//   segment := bare | '"' (char | '""')* '"'
//
// Bare segments are trimmed and may not contain > @ : or ". Quoted segments
// are taken verbatim, with "" standing for one literal quote.
struct SemanticTag {
  TagKind kind = TagKind::kCellIntersect;
  std::optional<Path> col_path;
  std::optional<Path> row_path;

  friend bool operator==(const SemanticTag&, const SemanticTag&) = default;
};

// Throws Error{kParseError} with the byte offset of the problem.
SemanticTag parse_tag(std::string_view text);

std::string format_tag(const SemanticTag& tag);

std::string_view kind_keyword(TagKind kind);

}  // namespace tableforge
