#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>

namespace conrad {

// eTLD+1 of a host under the bundled public-suffix snapshot.
struct RegistrableDomain {
    std::string value;

    auto operator<=>(const RegistrableDomain&) const = default;
    bool empty() const { return value.empty(); }
};

// Public-suffix rules in the standard list format: one rule per line,
// "//" comments, "*." wildcards and "!" exceptions. Hosts with no matching
// rule fall back to the implicit "*" rule (last label is the suffix).
class PublicSuffixList {
public:
    static PublicSuffixList from_string(std::string_view data);
    static PublicSuffixList load_file(const std::string& path);

    // eTLD+1 for a host. IP literals are returned unchanged. Returns
    // nullopt for hosts equal to a bare public suffix (unregistrable).
    std::optional<RegistrableDomain> registrable_domain(std::string_view host) const;

    // Longest matching public suffix for a (lowercase) host.
    std::string public_suffix(std::string_view host) const;

    std::size_t rule_count() const { return rules_.size() + wildcards_.size() + exceptions_.size(); }
    const std::string& version() const { return version_; }

private:
    std::unordered_set<std::string> rules_;
    std::unordered_set<std::string> wildcards_;   // stored without the "*." prefix
    std::unordered_set<std::string> exceptions_;  // stored without the "!" prefix
    std::string version_;
};

}  // namespace conrad

template <>
struct std::hash<conrad::RegistrableDomain> {
    std::size_t operator()(const conrad::RegistrableDomain& d) const noexcept {
        return std::hash<std::string>{}(d.value);
    }
};
