#include "conrad/public_suffix.hpp"

#include "conrad/util.hpp"

namespace conrad {

PublicSuffixList PublicSuffixList::from_string(std::string_view data) {
    PublicSuffixList psl;
    for (const std::string& raw : split(data, '\n')) {
        std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.rfind("//", 0) == 0) {
            auto vpos = line.find("version:");
            if (vpos != std::string::npos && psl.version_.empty())
                psl.version_ = trim(line.substr(vpos + 8));
            continue;
        }
        line = to_lower(line);
        if (line[0] == '!') {
            psl.exceptions_.insert(line.substr(1));
        } else if (line.rfind("*.", 0) == 0) {
            psl.wildcards_.insert(line.substr(2));
        } else {
            psl.rules_.insert(line);
        }
    }
    return psl;
}

PublicSuffixList PublicSuffixList::load_file(const std::string& path) {
    return from_string(read_file(path));
}

static std::string_view drop_first_label(std::string_view host) {
    auto dot = host.find('.');
    return dot == std::string_view::npos ? std::string_view{} : host.substr(dot + 1);
}

std::string PublicSuffixList::public_suffix(std::string_view host) const {
    // Walk suffixes from the full host down; the longest rule match wins,
    // exceptions beat wildcards. No match at all -> last label (implicit *).
    std::string_view suffix = host;
    while (!suffix.empty()) {
        std::string s(suffix);
        if (exceptions_.count(s)) {
            // The exception rule's suffix is the rule with its first label cut.
            return std::string(drop_first_label(suffix));
        }
        auto parent = drop_first_label(suffix);
        if (!parent.empty() && wildcards_.count(std::string(parent))) {
            return s;  // "*.x" matched with this label filling the wildcard
        }
        if (rules_.count(s)) return s;
        suffix = parent;
    }
    auto last_dot = host.rfind('.');
    return last_dot == std::string_view::npos ? std::string(host)
                                              : std::string(host.substr(last_dot + 1));
}

std::optional<RegistrableDomain> PublicSuffixList::registrable_domain(
    std::string_view host_in) const {
    if (host_in.empty()) return std::nullopt;
    std::string host = to_lower(host_in);
    while (!host.empty() && host.back() == '.') host.pop_back();
    if (host.empty()) return std::nullopt;
    if (is_ip_literal(host)) return RegistrableDomain{host};

    std::string suffix = public_suffix(host);
    if (host == suffix) return std::nullopt;  // unregistrable host
    if (host.size() <= suffix.size() + 1) return std::nullopt;

    // registrable domain = suffix plus exactly one more label
    std::string_view prefix(host.data(), host.size() - suffix.size() - 1);
    auto last_dot = prefix.rfind('.');
    std::string_view label =
        last_dot == std::string_view::npos ? prefix : prefix.substr(last_dot + 1);
    if (label.empty()) return std::nullopt;
    return RegistrableDomain{std::string(label) + "." + suffix};
}

}  // namespace conrad
