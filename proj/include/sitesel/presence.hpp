#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

namespace sitesel {

using SiteSet = std::set<std::string, std::less<>>;

/// Sites where a chain (or any establishment type) is present, with the number
/// of establishments per site.
struct PresenceSet {
  std::string label;
  std::map<std::string, int, std::less<>> counts;

  bool contains(std::string_view code) const { return counts.contains(code); }
  int count(std::string_view code) const {
    auto it = counts.find(code);
    return it == counts.end() ? 0 : it->second;
  }
  SiteSet sites() const {
    SiteSet out;
    for (const auto& [code, n] : counts) out.insert(code);
    return out;
  }
  int total() const {
    int n = 0;
    for (const auto& [code, c] : counts) n += c;
    return n;
  }

  bool operator==(const PresenceSet&) const = default;
};

}  // namespace sitesel
