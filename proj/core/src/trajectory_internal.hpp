#pragma once

#include <string>

#include "tableforge/table.hpp"

namespace tableforge {

// How a cell value is stated in answers: shortest decimal form when numeric,
// trimmed raw text otherwise.
std::string value_answer(const CellValue& v);

// How a cell value is stated in step texts: numbers bare, anything else quoted.
std::string value_text(const CellValue& v);

// A label as it appears in step texts, wrapped in double quotes. Embedded
// double quotes become single quotes so the span stays closed.
std::string quoted(const std::string& label);

}  // namespace tableforge
