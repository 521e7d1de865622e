#include "conrad/entities.hpp"

#include <nlohmann/json.hpp>

#include "conrad/util.hpp"

namespace conrad {

using nlohmann::json;

const char* category_name(Category c) {
    switch (c) {
        case Category::Advertising: return "Advertising";
        case Category::Analytics: return "Analytics";
        case Category::Social: return "Social";
        case Category::Content: return "Content";
        case Category::Other: return "Other";
    }
    return "Other";
}

std::optional<Category> category_from_name(std::string_view s) {
    for (Category c : kAllCategories)
        if (s == category_name(c)) return c;
    return std::nullopt;
}

EntityCatalog EntityCatalog::from_json(const std::string& text) {
    EntityCatalog cat;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("entity catalog: ") + e.what());
    }
    if (root.contains("version") && root["version"].is_string())
        cat.version_ = root["version"].get<std::string>();
    if (!root.contains("entities") || !root["entities"].is_array())
        throw ConfigError("entity catalog: missing \"entities\" array");

    for (const auto& je : root["entities"]) {
        Entity e;
        e.name = je.at("name").get<std::string>();
        auto c = category_from_name(je.at("category").get<std::string>());
        if (!c)
            throw ConfigError("entity catalog: unknown category for entity " + e.name);
        e.category = *c;
        for (const auto& d : je.at("domains"))
            e.domains.push_back(RegistrableDomain{to_lower(d.get<std::string>())});
        if (e.domains.empty())
            throw ConfigError("entity catalog: entity " + e.name + " has no domains");
        std::size_t idx = cat.entities_.size();
        for (const auto& d : e.domains) {
            auto [it, inserted] = cat.domain_index_.emplace(d, idx);
            if (!inserted)
                throw ConfigError("entity catalog: domain " + d.value +
                                  " claimed by two entities");
        }
        cat.entities_.push_back(std::move(e));
    }
    return cat;
}

EntityCatalog EntityCatalog::load_file(const std::string& path) {
    return from_json(read_file(path));
}

const Entity* EntityCatalog::entity_of(const RegistrableDomain& d) const {
    auto it = domain_index_.find(d);
    return it == domain_index_.end() ? nullptr : &entities_[it->second];
}

std::string EntityCatalog::entity_name(const RegistrableDomain& d) const {
    const Entity* e = entity_of(d);
    return e ? e->name : d.value;
}

bool EntityCatalog::same_provider(const RegistrableDomain& a,
                                  const RegistrableDomain& b) const {
    if (a == b) return true;
    const Entity* ea = entity_of(a);
    if (!ea) return false;
    return ea == entity_of(b);
}

Category EntityCatalog::categorize(const RegistrableDomain& d) const {
    const Entity* e = entity_of(d);
    return e ? e->category : Category::Other;
}

}  // namespace conrad
