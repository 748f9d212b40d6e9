#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sitesel::cli {

/// Runs one command line (without the program name). Returns 0 on success,
/// 1 when --strict ingestion found warnings, 2 on usage or fatal errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sitesel::cli
