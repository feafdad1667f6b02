#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace llmmcts {

enum class ObjectKind { Movable, Container, Surface, Room };

struct CatalogEntry {
  std::string name;     // canonical: lowercase, no whitespace ("kitchentable")
  std::string display;  // how the name is spoken in prompts ("kitchen table")
  ObjectKind kind;
};

// Household vocabulary: movable items, containers, surfaces and rooms.
// Names are unique across all four lists.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<CatalogEntry> entries);

  // The household vocabulary used by every shipped apartment.
  static const Catalog& household();

  std::vector<std::string> names(ObjectKind kind) const;
  std::vector<std::string> all_names() const;
  const std::vector<CatalogEntry>& entries() const { return entries_; }

  bool contains(std::string_view name) const;
  std::optional<ObjectKind> kind_of(std::string_view name) const;
  // Display form of a canonical name; falls back to the name itself.
  std::string display(std::string_view name) const;

 private:
  const CatalogEntry* find(std::string_view name) const;

  std::vector<CatalogEntry> entries_;  // sorted by name
};

// "Kitchen Table" -> "kitchentable".
std::string canonicalize(std::string_view text);

}  // namespace llmmcts
