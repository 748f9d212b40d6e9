#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sitesel::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

/// Splits comma-separated text with `"` quoting (doubled quotes escape).
/// Accepts LF and CRLF line endings and strips a leading UTF-8 BOM. Blank
/// lines are skipped. Throws Error(MalformedRow) on an unterminated quote.
std::vector<Row> parse(std::string_view text);

/// Quotes a field only when it contains a delimiter, quote or line break.
std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace sitesel::csv
