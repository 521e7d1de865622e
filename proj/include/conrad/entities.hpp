#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conrad/public_suffix.hpp"

namespace conrad {

enum class Category { Advertising, Analytics, Social, Content, Other };

const char* category_name(Category c);
std::optional<Category> category_from_name(std::string_view s);
inline constexpr Category kAllCategories[] = {Category::Advertising, Category::Analytics,
                                              Category::Social, Category::Content,
                                              Category::Other};

struct Entity {
    std::string name;
    Category category = Category::Other;
    std::vector<RegistrableDomain> domains;
};

// Ownership map from registrable domains to entities. Immutable after load;
// the empty catalog is valid (every domain is its own unknown entity).
class EntityCatalog {
public:
    EntityCatalog() = default;

    // JSON schema: {"version": str?, "entities":
    //   [{"name": str, "category": str, "domains": [str, ...]}, ...]}
    // Domain sets must be disjoint and non-empty.
    static EntityCatalog from_json(const std::string& text);
    static EntityCatalog load_file(const std::string& path);

    const Entity* entity_of(const RegistrableDomain& d) const;

    // Entity name when known, else the domain itself.
    std::string entity_name(const RegistrableDomain& d) const;

    // True iff equal domains or both owned by the same entity. Unknown
    // domains are same-provider only when equal.
    bool same_provider(const RegistrableDomain& a, const RegistrableDomain& b) const;

    Category categorize(const RegistrableDomain& d) const;

    std::size_t entity_count() const { return entities_.size(); }
    bool empty() const { return entities_.empty(); }
    const std::string& version() const { return version_; }
    const std::vector<Entity>& entities() const { return entities_; }

private:
    std::vector<Entity> entities_;
    std::map<RegistrableDomain, std::size_t> domain_index_;
    std::string version_;
};

}  // namespace conrad
