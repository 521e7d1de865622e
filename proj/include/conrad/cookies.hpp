#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "conrad/id_scanner.hpp"
#include "conrad/public_suffix.hpp"
#include "conrad/traffic.hpp"

namespace conrad {

// A persistent cookie observed on a user's browser, with the ID-looking
// fragments of its value already extracted.
struct CookieRecord {
    std::string user_id;
    RegistrableDomain setter_domain;
    std::string name;
    std::string raw_value;
    std::vector<std::string> id_tokens;
    std::optional<std::int64_t> expires_at_ms;
    std::int64_t set_at_ms = 0;
    bool secure_context = false;  // set over https
    std::size_t record_ref = 0;
};

enum class CookieReject { None, Session, Malformed, AlreadyExpired };

const char* cookie_reject_name(CookieReject r);

struct CookieParseResult {
    std::optional<CookieRecord> cookie;
    CookieReject reject = CookieReject::None;

    bool accepted() const { return cookie.has_value(); }
};

// Parses one raw Set-Cookie header in the context of the carrying record.
// Session cookies (no Expires/Max-Age) are rejected; the Domain attribute is
// honored when present, otherwise the request host names the setter.
CookieParseResult parse_set_cookie(std::string_view header, const HttpRecord& ctx,
                                   std::size_t record_ref, const PublicSuffixList& psl,
                                   const IdPredicate& pred);

// Per-user map of candidate cookie IDs to the domains that set them.
// Lookups are exact-match and case-sensitive.
class IdRepository {
public:
    struct Owner {
        RegistrableDomain domain;
        std::int64_t first_seen_ms = 0;
        bool secure = false;  // ever set over https by this owner
    };

    // Earliest first_seen wins for repeated (token, owner) registrations.
    void record(const CookieRecord& c);

    bool contains(const std::string& user, const std::string& token) const;
    const std::vector<Owner>* owners(const std::string& user,
                                     const std::string& token) const;
    // Earliest Set-Cookie timestamp across owners; nullopt if unknown token.
    std::optional<std::int64_t> earliest_set_ms(const std::string& user,
                                                const std::string& token) const;
    // Owner with the earliest first_seen (ties by domain order).
    std::optional<RegistrableDomain> earliest_owner(const std::string& user,
                                                    const std::string& token) const;

    const std::set<std::string>* tokens_of_domain(const std::string& user,
                                                  const RegistrableDomain& d) const;

    std::size_t token_count(const std::string& user) const;
    std::vector<std::string> users() const;
    std::vector<std::string> tokens(const std::string& user) const;

    std::string to_json() const;
    static IdRepository from_json(const std::string& text);

private:
    struct UserRepo {
        std::map<std::string, std::vector<Owner>> token_owners;
        std::map<RegistrableDomain, std::set<std::string>> domain_tokens;
    };
    std::map<std::string, UserRepo> users_;
};

// Convenience: parse every Set-Cookie header of a record stream into the
// repository, returning the accepted cookie records in stream order.
std::vector<CookieRecord> build_repository(const std::vector<HttpRecord>& records,
                                           const PublicSuffixList& psl,
                                           const IdPredicate& pred, IdRepository& repo);

}  // namespace conrad
