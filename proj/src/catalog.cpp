#include "llmmcts/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "llmmcts/errors.hpp"

namespace llmmcts {

namespace {

constexpr const char* kContainers[] = {
    "bathroom cabinet", "kitchen cabinet", "bathroom counter", "fridge",
    "oven",             "dishwasher",      "microwave",        "stove",
};

// "stove" is listed as a container only.
constexpr const char* kSurfaces[] = {
    "bed",            "bookshelf",    "cabinet",       "coffee table",
    "cutting board",  "floor",        "fryingpan",     "kitchen counter",
    "kitchen table",  "nightstand",   "sofa",
};

// "cutting board" and "fryingpan" are surfaces and are not repeated here.
constexpr const char* kMovables[] = {
    "alcohol",        "apple",          "banana",
    "bar soap",       "bell pepper",    "boardgame",
    "book",           "box",            "bread slice",
    "bucket",         "candle",         "candy bar",
    "carrot",         "cellphone",      "cereal",
    "chicken",        "chinese food",   "chips",
    "chocolate syrup", "clock",         "clothes pants",
    "clothes pile",   "clothes shirt",  "coatrack",
    "coffeepot",      "condiment bottle", "condiment shaker",
    "cooking pot",    "crackers",       "crayons",
    "creamy buns",    "cupcake",        "cutlery fork",
    "cutlery knife",  "cutlets",        "dish bowl",
    "dishwashing liquid", "face cream", "folder",
    "glasses",        "globe",          "hair product",
    "hanger",         "juice",          "keyboard",
    "lime",           "lotion bottle",  "magazine",
    "milk",           "milkshake",      "minced meat",
    "mouse",          "mug",            "notes",
    "oven tray",      "pancake",        "paper",
    "pear",           "pie",            "pillow",
    "plate",          "plum",           "poundcake",
    "pudding",        "radio",          "remote control",
    "salad",          "salmon",         "slippers",
    "sports ball",    "sundae",         "teddybear",
    "toilet paper",   "toothbrush",     "toothpaste",
    "towel",          "towel rack",     "toy",
    "washing sponge", "water glass",    "whipped cream",
    "wine",           "wineglass",
};

constexpr const char* kRooms[] = {"bedroom", "bathroom", "living room",
                                  "kitchen"};

template <std::size_t N>
void append(std::vector<CatalogEntry>& out, const char* const (&names)[N],
            ObjectKind kind) {
  for (const char* display : names) {
    out.push_back({canonicalize(display), display, kind});
  }
}

}  // namespace

std::string canonicalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

Catalog::Catalog(std::vector<CatalogEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.name.empty() || e.name != canonicalize(e.name)) {
      throw SceneFormatError("catalog name is not canonical: '" + e.name + "'");
    }
    if (!seen.insert(e.name).second) {
      throw SceneFormatError("duplicate catalog name: " + e.name);
    }
  }
  std::sort(entries_.begin(), entries_.end(),
            [](const auto& a, const auto& b) { return a.name < b.name; });
}

const Catalog& Catalog::household() {
  static const Catalog catalog = [] {
    std::vector<CatalogEntry> entries;
    append(entries, kMovables, ObjectKind::Movable);
    append(entries, kContainers, ObjectKind::Container);
    append(entries, kSurfaces, ObjectKind::Surface);
    append(entries, kRooms, ObjectKind::Room);
    return Catalog(std::move(entries));
  }();
  return catalog;
}

std::vector<std::string> Catalog::names(ObjectKind kind) const {
  std::vector<std::string> out;
  for (const auto& e : entries_) {
    if (e.kind == kind) out.push_back(e.name);
  }
  return out;
}

std::vector<std::string> Catalog::all_names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

const CatalogEntry* Catalog::find(std::string_view name) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), name,
      [](const CatalogEntry& e, std::string_view n) { return e.name < n; });
  if (it == entries_.end() || it->name != name) return nullptr;
  return &*it;
}

bool Catalog::contains(std::string_view name) const { return find(name) != nullptr; }

std::optional<ObjectKind> Catalog::kind_of(std::string_view name) const {
  const auto* e = find(name);
  if (!e) return std::nullopt;
  return e->kind;
}

std::string Catalog::display(std::string_view name) const {
  const auto* e = find(name);
  return e ? e->display : std::string(name);
}

}  // namespace llmmcts
