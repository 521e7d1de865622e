#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conrad/detector.hpp"
#include "conrad/features.hpp"
#include "conrad/privacy.hpp"
#include "conrad/traffic.hpp"

namespace conrad {

// Knobs of the labeled-traffic generator. The seed fully determines the
// output; all probabilities are in [0,1].
struct ScenarioConfig {
    std::uint64_t seed = 42;
    std::size_t n_users = 20;
    std::size_t n_publishers = 8;
    std::size_t n_ad = 12;
    std::size_t n_analytics = 4;
    std::size_t n_social = 3;
    std::size_t n_content = 4;
    std::size_t n_other = 3;
    std::size_t n_provider_pairs = 2;  // two-domain entities for internal shares

    std::size_t visits_per_user = 20;
    double revisit_rate = 0.35;
    std::size_t embeds_min = 2;
    std::size_t embeds_max = 5;

    double sync_prob = 0.30;            // per embedded third-party request
    double publisher_chain_prob = 0.05; // fraction of chains syncing the publisher id
    std::vector<double> extra_hops_pub = {0.9, 0.1};
    std::vector<double> extra_hops_trk = {0.4, 0.4, 0.15, 0.05};
    std::array<double, 3> carrier_mix = {0.92, 0.04, 0.04};  // param/path/referrer
    double ad_receiver_bias = 0.85;
    double param_correlation = 0.9;  // label-correlated parameter vocabulary

    // token in sync URLs replaced by a keyed per-(token, receiver) hash
    double obfuscation_rate = 0.0;

    double nonce_rate = 0.0;          // one-off ID-looking cache busters
    std::size_t campaign_tokens = 0;  // shared but never cookie-backed (total)
    std::size_t campaign_spread = 6;  // domains each campaign token reaches

    std::size_t universal_ids = 0;
    std::size_t universal_extra_setters = 5;
    std::size_t id_summaries = 0;
    std::size_t tls_spills = 0;
    bool pii_all_kinds = false;  // one sync per PII kind with a leaking param
    std::size_t provider_internal_shares = 0;

    static ScenarioConfig from_json(const std::string& text);
    std::string to_json() const;
    void validate() const;  // throws ConfigError on infeasible settings
};

// Named presets: paper-mix (detector validation), balanced-3class
// (classifier corpora), spill-heavy, attribution-matrix (equal initiator
// classes, single clean chains), unbalanced-3class (rare-sync ratios).
ScenarioConfig preset_config(const std::string& name);

struct ManifestCookie {
    std::string user, token, owner;
    bool secure = false;
    std::size_t record = 0;
};

struct ManifestSync {
    std::string user;
    std::string token;       // original cookie ID
    std::string wire_token;  // as it appears in the URL
    std::string sender;      // per the referrer-first sender rule
    std::string true_sharer; // the party whose code fired the request
    std::string receiver;
    Carrier carrier = Carrier::Param;
    std::string param_name;  // empty for path carrier
    InitiatorClass initiator = InitiatorClass::Unattributed;
    bool obfuscated = false;
    std::size_t record = 0;
};

struct ManifestExample {
    std::size_t record = 0;
    ExampleLabel label = ExampleLabel::Other;
};

struct ManifestUniversalId {
    std::string user, token;
    std::vector<std::string> owners;  // in setting order
};

struct ManifestSummaryEntry {
    std::string user, setter;
    std::size_t record = 0;
    std::vector<std::string> tokens;
};

struct ManifestSpillEntry {
    std::string user, token, receiver;
    std::size_t record = 0;
};

struct ManifestPiiEntry {
    std::string user;
    PiiKind kind = PiiKind::Email;
    std::string param;
    std::size_t record = 0;
};

struct Manifest {
    std::vector<ManifestCookie> cookies;
    std::vector<ManifestSync> syncs;
    std::vector<ManifestSync> provider_internal;  // expected to be filtered
    std::vector<ManifestUniversalId> universal_ids;
    std::vector<ManifestSummaryEntry> id_summaries;
    std::vector<ManifestSpillEntry> spills;
    std::vector<ManifestPiiEntry> pii;
    std::vector<ManifestExample> examples;

    std::string to_json() const;
    static Manifest from_json(const std::string& text);
};

struct GenResult {
    std::vector<HttpRecord> records;  // time-sorted; manifest refs index here
    Manifest manifest;
    std::string catalog_json;  // matching entity catalog
};

GenResult generate(const ScenarioConfig& cfg);

}  // namespace conrad
