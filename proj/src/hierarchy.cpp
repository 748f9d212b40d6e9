#include "sitesel/hierarchy.hpp"

#include "sitesel/error.hpp"

#include <algorithm>
#include <set>

namespace sitesel {

Levels::Levels(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw Error(Errc::SchemaViolation, "at least two administrative levels are required");
  }
  std::set<std::string_view> seen;
  for (const auto& n : names_) {
    if (n.empty() || !seen.insert(n).second) {
      throw Error(Errc::SchemaViolation, "level names must be non-empty and unique: '" + n + "'");
    }
  }
}

Levels Levels::defaults() {
  return Levels({"Nation", "State", "County", "District", "Municipality"});
}

std::optional<LevelIndex> Levels::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<LevelIndex>(it - names_.begin());
}

LevelIndex Levels::require(std::string_view name) const {
  if (auto l = find(name)) return *l;
  throw Error(Errc::UnknownLevel, "unknown level '" + std::string(name) + "'");
}

Hierarchy Hierarchy::build(Levels levels, std::span<const SiteRecord> records) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no site records");

  Hierarchy h;
  h.levels_ = std::move(levels);
  h.sites_.reserve(records.size());

  for (const auto& r : records) {
    if (r.level >= h.levels_.size()) {
      throw Error(Errc::UnknownLevel, "site '" + r.code + "' has level index " + std::to_string(r.level));
    }
    const auto id = static_cast<SiteId>(h.sites_.size());
    if (!h.index_.emplace(r.code, id).second) {
      throw Error(Errc::DuplicateCode, "site code '" + r.code + "' appears more than once");
    }
    h.sites_.push_back(Site{r.code, r.name, r.level, std::nullopt});
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.parent_code.empty()) continue;
    auto parent = h.find(r.parent_code);
    if (!parent) {
      throw Error(Errc::UnknownParent, "site '" + r.code + "' references unknown parent '" + r.parent_code + "'");
    }
    h.sites_[i].parent = *parent;
  }

  // 0 = unvisited, 1 = on current path, 2 = known to reach a root
  std::vector<std::uint8_t> state(h.sites_.size(), 0);
  for (SiteId start = 0; start < h.sites_.size(); ++start) {
    std::vector<SiteId> path;
    std::optional<SiteId> cur = start;
    while (cur && state[*cur] == 0) {
      state[*cur] = 1;
      path.push_back(*cur);
      cur = h.sites_[*cur].parent;
    }
    if (cur && state[*cur] == 1) {
      throw Error(Errc::CycleDetected, "parent chain of '" + h.sites_[*cur].code + "' loops back onto itself");
    }
    for (auto id : path) state[id] = 2;
  }

  h.children_.assign(h.sites_.size(), {});
  for (SiteId id = 0; id < h.sites_.size(); ++id) {
    const auto& s = h.sites_[id];
    if (!s.parent) {
      if (s.level != 0) {
        throw Error(Errc::LevelSkip, "root site '" + s.code + "' is not at the top level '" + h.levels_.name(0) + "'");
      }
      h.roots_.push_back(id);
      continue;
    }
    const auto& p = h.sites_[*s.parent];
    if (p.level + 1 != s.level) {
      throw Error(Errc::LevelSkip, "site '" + s.code + "' (" + h.levels_.name(s.level) + ") has parent '" + p.code +
                                       "' (" + h.levels_.name(p.level) + ")");
    }
    h.children_[*s.parent].push_back(id);
  }
  return h;
}

std::optional<SiteId> Hierarchy::find(std::string_view code) const {
  auto it = index_.find(code);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SiteId Hierarchy::require(std::string_view code) const {
  if (auto id = find(code)) return *id;
  throw Error(Errc::UnknownSite, "unknown site '" + std::string(code) + "'");
}

std::size_t Hierarchy::count_at(LevelIndex level) const {
  return static_cast<std::size_t>(
      std::count_if(sites_.begin(), sites_.end(), [level](const Site& s) { return s.level == level; }));
}

std::vector<SiteId> Hierarchy::at_level(LevelIndex level) const {
  std::vector<SiteId> out;
  for (SiteId id = 0; id < sites_.size(); ++id) {
    if (sites_[id].level == level) out.push_back(id);
  }
  return out;
}

std::vector<SiteId> Hierarchy::subtree_at_level(SiteId root, LevelIndex level) const {
  std::vector<SiteId> out;
  std::vector<SiteId> stack{root};
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    const auto& s = sites_.at(id);
    if (s.level == level) {
      out.push_back(id);
      continue;
    }
    if (s.level > level) continue;
    const auto& kids = children_[id];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

bool Hierarchy::is_within(SiteId site, SiteId ancestor) const {
  std::optional<SiteId> cur = site;
  while (cur) {
    if (*cur == ancestor) return true;
    cur = sites_.at(*cur).parent;
  }
  return false;
}

std::vector<SiteRecord> Hierarchy::records() const {
  std::vector<SiteRecord> out;
  out.reserve(sites_.size());
  for (const auto& s : sites_) {
    out.push_back(SiteRecord{s.code, s.name, s.level, s.parent ? sites_[*s.parent].code : std::string{}});
  }
  return out;
}

}  // namespace sitesel
