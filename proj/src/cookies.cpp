#include "conrad/cookies.hpp"

#include <algorithm>
#include <charconv>

#include <nlohmann/json.hpp>

#include "conrad/util.hpp"

namespace conrad {

using nlohmann::json;

const char* cookie_reject_name(CookieReject r) {
    switch (r) {
        case CookieReject::None: return "none";
        case CookieReject::Session: return "session";
        case CookieReject::Malformed: return "malformed";
        case CookieReject::AlreadyExpired: return "already-expired";
    }
    return "none";
}

CookieParseResult parse_set_cookie(std::string_view header, const HttpRecord& ctx,
                                   std::size_t record_ref, const PublicSuffixList& psl,
                                   const IdPredicate& pred) {
    std::string trimmed = trim(header);
    if (trimmed.empty()) return {std::nullopt, CookieReject::Malformed};

    auto parts = split(trimmed, ';');
    std::string first = trim(parts[0]);
    auto eq = first.find('=');
    if (eq == std::string::npos || eq == 0)
        return {std::nullopt, CookieReject::Malformed};

    CookieRecord c;
    c.user_id = ctx.user_id;
    c.name = trim(first.substr(0, eq));
    c.raw_value = trim(first.substr(eq + 1));
    c.set_at_ms = ctx.timestamp_ms;
    c.secure_context = ctx.scheme == Scheme::Https;
    c.record_ref = record_ref;

    std::optional<std::string> domain_attr;
    std::optional<std::int64_t> expires;
    std::optional<std::int64_t> max_age;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        std::string attr = trim(parts[i]);
        if (attr.empty()) continue;
        std::string key, val;
        auto aeq = attr.find('=');
        if (aeq == std::string::npos) {
            key = to_lower(attr);
        } else {
            key = to_lower(trim(attr.substr(0, aeq)));
            val = trim(attr.substr(aeq + 1));
        }
        if (key == "expires") {
            auto t = parse_http_date_ms(val);
            if (!t) return {std::nullopt, CookieReject::Malformed};
            expires = *t;
        } else if (key == "max-age") {
            std::int64_t secs = 0;
            auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), secs);
            if (ec != std::errc() || p != val.data() + val.size())
                return {std::nullopt, CookieReject::Malformed};
            max_age = secs;
        } else if (key == "domain") {
            std::string d = to_lower(val);
            if (!d.empty() && d[0] == '.') d.erase(d.begin());
            if (!d.empty()) domain_attr = d;
        }
    }

    // Max-Age takes precedence over Expires, per cookie semantics.
    if (max_age) {
        if (*max_age <= 0) return {std::nullopt, CookieReject::AlreadyExpired};
        c.expires_at_ms = ctx.timestamp_ms + *max_age * 1000;
    } else if (expires) {
        if (*expires <= ctx.timestamp_ms)
            return {std::nullopt, CookieReject::AlreadyExpired};
        c.expires_at_ms = *expires;
    } else {
        return {std::nullopt, CookieReject::Session};
    }

    const std::string& host = domain_attr ? *domain_attr : ctx.host;
    auto rd = psl.registrable_domain(host);
    if (!rd) {
        // fall back to the request host when the Domain attribute is unusable
        rd = psl.registrable_domain(ctx.host);
        if (!rd) return {std::nullopt, CookieReject::Malformed};
    }
    c.setter_domain = *rd;

    for (auto& frag : split_value(c.raw_value))
        if (pred(frag)) c.id_tokens.push_back(std::move(frag));

    return {std::move(c), CookieReject::None};
}

void IdRepository::record(const CookieRecord& c) {
    UserRepo& ur = users_[c.user_id];
    for (const auto& token : c.id_tokens) {
        auto& owners = ur.token_owners[token];
        auto it = std::find_if(owners.begin(), owners.end(), [&](const Owner& o) {
            return o.domain == c.setter_domain;
        });
        if (it == owners.end()) {
            owners.push_back({c.setter_domain, c.set_at_ms, c.secure_context});
        } else {
            it->first_seen_ms = std::min(it->first_seen_ms, c.set_at_ms);
            it->secure = it->secure || c.secure_context;
        }
        ur.domain_tokens[c.setter_domain].insert(token);
    }
}

bool IdRepository::contains(const std::string& user, const std::string& token) const {
    return owners(user, token) != nullptr;
}

const std::vector<IdRepository::Owner>* IdRepository::owners(
    const std::string& user, const std::string& token) const {
    auto uit = users_.find(user);
    if (uit == users_.end()) return nullptr;
    auto tit = uit->second.token_owners.find(token);
    if (tit == uit->second.token_owners.end()) return nullptr;
    return &tit->second;
}

std::optional<std::int64_t> IdRepository::earliest_set_ms(
    const std::string& user, const std::string& token) const {
    const auto* os = owners(user, token);
    if (!os || os->empty()) return std::nullopt;
    std::int64_t best = os->front().first_seen_ms;
    for (const auto& o : *os) best = std::min(best, o.first_seen_ms);
    return best;
}

std::optional<RegistrableDomain> IdRepository::earliest_owner(
    const std::string& user, const std::string& token) const {
    const auto* os = owners(user, token);
    if (!os || os->empty()) return std::nullopt;
    const Owner* best = &os->front();
    for (const auto& o : *os) {
        if (o.first_seen_ms < best->first_seen_ms ||
            (o.first_seen_ms == best->first_seen_ms && o.domain < best->domain))
            best = &o;
    }
    return best->domain;
}

const std::set<std::string>* IdRepository::tokens_of_domain(
    const std::string& user, const RegistrableDomain& d) const {
    auto uit = users_.find(user);
    if (uit == users_.end()) return nullptr;
    auto dit = uit->second.domain_tokens.find(d);
    if (dit == uit->second.domain_tokens.end()) return nullptr;
    return &dit->second;
}

std::size_t IdRepository::token_count(const std::string& user) const {
    auto uit = users_.find(user);
    return uit == users_.end() ? 0 : uit->second.token_owners.size();
}

std::vector<std::string> IdRepository::users() const {
    std::vector<std::string> out;
    out.reserve(users_.size());
    for (const auto& [u, _] : users_) out.push_back(u);
    return out;
}

std::vector<std::string> IdRepository::tokens(const std::string& user) const {
    std::vector<std::string> out;
    auto uit = users_.find(user);
    if (uit == users_.end()) return out;
    out.reserve(uit->second.token_owners.size());
    for (const auto& [t, _] : uit->second.token_owners) out.push_back(t);
    return out;
}

std::string IdRepository::to_json() const {
    json root;
    root["version"] = 1;
    json users = json::object();
    for (const auto& [user, ur] : users_) {
        json tokens = json::object();
        for (const auto& [token, owners] : ur.token_owners) {
            json arr = json::array();
            for (const auto& o : owners) {
                arr.push_back({{"domain", o.domain.value},
                               {"first_seen", o.first_seen_ms},
                               {"secure", o.secure}});
            }
            tokens[token] = std::move(arr);
        }
        users[user] = std::move(tokens);
    }
    root["users"] = std::move(users);
    return root.dump(2);
}

IdRepository IdRepository::from_json(const std::string& text) {
    IdRepository repo;
    json root = json::parse(text);
    for (const auto& [user, tokens] : root.at("users").items()) {
        UserRepo& ur = repo.users_[user];
        for (const auto& [token, arr] : tokens.items()) {
            auto& owners = ur.token_owners[token];
            for (const auto& o : arr) {
                Owner owner;
                owner.domain.value = o.at("domain").get<std::string>();
                owner.first_seen_ms = o.at("first_seen").get<std::int64_t>();
                owner.secure = o.value("secure", false);
                owners.push_back(owner);
                ur.domain_tokens[owner.domain].insert(token);
            }
        }
    }
    return repo;
}

std::vector<CookieRecord> build_repository(const std::vector<HttpRecord>& records,
                                           const PublicSuffixList& psl,
                                           const IdPredicate& pred, IdRepository& repo) {
    std::vector<CookieRecord> accepted;
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (const auto& header : records[i].set_cookies) {
            auto res = parse_set_cookie(header, records[i], i, psl, pred);
            if (res.accepted()) {
                repo.record(*res.cookie);
                accepted.push_back(std::move(*res.cookie));
            }
        }
    }
    return accepted;
}

}  // namespace conrad
