#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "conrad/cookies.hpp"
#include "conrad/detector.hpp"
#include "conrad/entities.hpp"

namespace conrad {

enum class PiiKind { Location, Phone, Gender, Age, BirthDate, FullName, Email, Credentials };
const char* pii_kind_name(PiiKind k);
std::optional<PiiKind> pii_kind_from_name(std::string_view s);

// Keyword and value-pattern tables for the PII co-leak scanner. The shipped
// defaults live in data/pii_patterns.json.
class PiiConfig {
public:
    static PiiConfig from_json(const std::string& text);
    static PiiConfig load_file(const std::string& path);
    static PiiConfig defaults();

    // Case-insensitive exact match on the parameter name.
    std::optional<PiiKind> match_keyword(std::string_view param_name) const;
    // Full-match value patterns (email, E.164 phone, year, ISO date).
    std::optional<PiiKind> match_value(const std::string& value) const;

private:
    std::map<std::string, PiiKind> keywords_;
    std::vector<std::pair<PiiKind, std::regex>> value_patterns_;
};

struct PiiFinding {
    PiiKind kind = PiiKind::Email;
    std::string param_name;
    std::size_t record_ref = 0;
    std::string co_synced_token;
    std::string user_id;

    bool operator==(const PiiFinding&) const = default;
};

// A userID set over https observed inside a plaintext request.
struct SpillFinding {
    std::string token;
    RegistrableDomain secure_origin;
    RegistrableDomain plaintext_receiver;
    std::optional<std::string> leaked_referrer_url;
    std::size_t record_ref = 0;
    std::string user_id;
};

struct UniversalIdFinding {
    std::string token;
    std::vector<RegistrableDomain> owners;  // ordered by first_seen
    std::string user_id;
};

struct IdSummaryFinding {
    std::size_t cookie_record_ref = 0;
    RegistrableDomain setter;
    std::string cookie_name;
    std::vector<std::string> foreign_tokens;
    std::string user_id;
};

struct UserPrivacyReport {
    std::string user_id;
    std::size_t total_requests = 0;
    std::size_t csync_events = 0;
    std::optional<std::int64_t> time_to_first_csync_ms;
    double csync_per_request = 0.0;
    std::size_t unique_ids_synced = 0;
    std::map<std::string, std::size_t> per_id_receiver_counts;  // token -> entities
    std::size_t learners_before = 0;
    std::size_t learners_after = 0;
    double diffusion_factor = 1.0;
    std::vector<SpillFinding> tls_spills;
    std::vector<PiiFinding> pii_leaks;
    std::vector<UniversalIdFinding> universal_ids;
    std::vector<IdSummaryFinding> id_summaries;
    double span_days = 0.0;
};

struct PrivacyOptions {
    // Count learners at entity granularity (default) or raw domains.
    bool per_domain_learners = false;
    double regular_user_threshold = 10.0;  // requests per day
};

UserPrivacyReport compute_user_report(const std::string& user,
                                      const std::vector<SharingEvent>& events,
                                      const std::vector<HttpRecord>& records,
                                      const std::vector<std::size_t>& user_refs,
                                      const std::vector<CookieRecord>& cookies,
                                      const IdRepository& repo,
                                      const EntityCatalog& catalog,
                                      const PublicSuffixList& psl,
                                      const IdPredicate& pred, const PiiConfig& pii,
                                      const PrivacyOptions& opts = {});

// Tokens whose owner set spans at least two entities, owners ordered by
// first_seen.
std::vector<UniversalIdFinding> detect_universal_ids(const IdRepository& repo,
                                                     const std::string& user,
                                                     const EntityCatalog& catalog);

// Cookies whose delimiter-split value contains >= 2 tokens owned by entities
// other than the setter.
std::vector<IdSummaryFinding> detect_id_summaries(
    const std::vector<CookieRecord>& cookies, const IdRepository& repo,
    const EntityCatalog& catalog);

// Occurrences of https-set tokens in http requests (URL or referrer).
std::vector<SpillFinding> detect_tls_spills(const std::vector<SharingEvent>& events,
                                            const std::vector<CookieRecord>& cookies,
                                            const std::vector<HttpRecord>& records,
                                            const std::vector<std::size_t>& user_refs,
                                            const PublicSuffixList& psl,
                                            const IdPredicate& pred);

// PII keyword/pattern scan over requests that carry a sharing event.
std::vector<PiiFinding> scan_pii(const std::vector<HttpRecord>& records,
                                 const std::vector<SharingEvent>& events,
                                 const PiiConfig& cfg);

// category -> fraction of synced tokens received by >= 1 entity of it.
std::map<Category, double> category_shares(const std::vector<SharingEvent>& events,
                                           const EntityCatalog& catalog);

struct Percentiles {
    double p10 = 0, p25 = 0, p50 = 0, p75 = 0, p90 = 0;
};
Percentiles percentiles(std::vector<double> values);  // linear interpolation

struct AggregateReport {
    std::size_t users = 0;
    std::size_t regular_users = 0;
    std::size_t exposed_regular_users = 0;  // regular users with >= 1 CSync
    double exposure_rate = 0.0;
    Percentiles csync_per_request;
    Percentiles unique_ids_synced;
    Percentiles diffusion_factor;
    Percentiles time_to_first_csync_ms;  // users with a CSync only
    Percentiles receivers_per_token;     // pooled over tokens
    std::map<Carrier, double> carrier_breakdown;  // fraction of CSync events
    std::map<Category, double> category_shares;
    std::size_t universal_ids = 0;
    std::size_t id_summaries = 0;
    std::size_t tls_spills = 0;
    std::map<PiiKind, std::size_t> pii_by_kind;
};

struct PrivacyReport {
    std::vector<UserPrivacyReport> users;
    AggregateReport aggregate;
};

PrivacyReport compute_report(const std::vector<SharingEvent>& events,
                             const std::vector<HttpRecord>& records,
                             const std::vector<CookieRecord>& cookies,
                             const IdRepository& repo, const EntityCatalog& catalog,
                             const PublicSuffixList& psl, const IdPredicate& pred,
                             const PiiConfig& pii, const PrivacyOptions& opts = {});

std::string report_to_json(const PrivacyReport& r);
std::string report_to_csv(const PrivacyReport& r);

}  // namespace conrad
