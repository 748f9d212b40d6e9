#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sitesel {

/// Position of an administrative level, 0 being the top (e.g. the nation).
using LevelIndex = std::size_t;

/// Ordered list of administrative level names. Data-driven so the same engine
/// works for any country's territorial division.
class Levels {
 public:
  explicit Levels(std::vector<std::string> names);

  /// Nation, State, County, District, Municipality.
  static Levels defaults();

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(LevelIndex level) const { return names_.at(level); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<LevelIndex> find(std::string_view name) const;
  LevelIndex require(std::string_view name) const;
  LevelIndex bottom() const noexcept { return names_.size() - 1; }

  bool operator==(const Levels&) const = default;

 private:
  std::vector<std::string> names_;
};

struct SiteRecord {
  std::string code;
  std::string name;
  LevelIndex level = 0;
  std::string parent_code;  // empty for roots

  bool operator==(const SiteRecord&) const = default;
};

using SiteId = std::uint32_t;

struct Site {
  std::string code;
  std::string name;
  LevelIndex level = 0;
  std::optional<SiteId> parent;
};

/// Validated territorial forest. Sites keep their input order; children are
/// indexed by parent in input order as well.
class Hierarchy {
 public:
  /// Throws Error with DuplicateCode, UnknownParent, CycleDetected, LevelSkip,
  /// UnknownLevel or EmptyInput.
  static Hierarchy build(Levels levels, std::span<const SiteRecord> records);

  const Levels& levels() const noexcept { return levels_; }
  std::size_t size() const noexcept { return sites_.size(); }
  const Site& site(SiteId id) const { return sites_.at(id); }
  std::span<const Site> sites() const noexcept { return sites_; }

  std::optional<SiteId> find(std::string_view code) const;
  /// Throws UnknownSite.
  SiteId require(std::string_view code) const;

  std::span<const SiteId> children(SiteId id) const { return children_.at(id); }
  std::span<const SiteId> roots() const noexcept { return roots_; }
  bool is_leaf(SiteId id) const { return children_.at(id).empty(); }

  std::size_t count_at(LevelIndex level) const;
  std::vector<SiteId> at_level(LevelIndex level) const;
  /// Sites at `level` inside the subtree rooted at `root` (including `root`
  /// itself when it sits at that level), in depth-first order.
  std::vector<SiteId> subtree_at_level(SiteId root, LevelIndex level) const;
  bool is_within(SiteId site, SiteId ancestor) const;

  std::vector<SiteRecord> records() const;

 private:
  Levels levels_{Levels::defaults()};
  std::vector<Site> sites_;
  std::vector<std::vector<SiteId>> children_;
  std::vector<SiteId> roots_;
  std::map<std::string, SiteId, std::less<>> index_;
};

inline Hierarchy build_hierarchy(Levels levels, std::span<const SiteRecord> records) {
  return Hierarchy::build(std::move(levels), records);
}

}  // namespace sitesel
