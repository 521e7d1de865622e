#include "conrad/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "conrad/util.hpp"

namespace conrad {

using nlohmann::json;

const char* pii_kind_name(PiiKind k) {
    switch (k) {
        case PiiKind::Location: return "location";
        case PiiKind::Phone: return "phone";
        case PiiKind::Gender: return "gender";
        case PiiKind::Age: return "age";
        case PiiKind::BirthDate: return "birth-date";
        case PiiKind::FullName: return "full-name";
        case PiiKind::Email: return "email";
        case PiiKind::Credentials: return "credentials";
    }
    return "email";
}

std::optional<PiiKind> pii_kind_from_name(std::string_view s) {
    static const PiiKind kinds[] = {PiiKind::Location, PiiKind::Phone,  PiiKind::Gender,
                                    PiiKind::Age,      PiiKind::BirthDate,
                                    PiiKind::FullName, PiiKind::Email,
                                    PiiKind::Credentials};
    for (PiiKind k : kinds)
        if (s == pii_kind_name(k)) return k;
    return std::nullopt;
}

PiiConfig PiiConfig::from_json(const std::string& text) {
    PiiConfig cfg;
    json root = json::parse(text);
    for (const auto& [key, val] : root.at("keywords").items()) {
        auto kind = pii_kind_from_name(val.get<std::string>());
        if (!kind) throw ConfigError("pii config: unknown kind " + val.get<std::string>());
        cfg.keywords_[to_lower(key)] = *kind;
    }
    if (root.contains("value_patterns")) {
        for (const auto& p : root["value_patterns"]) {
            auto kind = pii_kind_from_name(p.at("kind").get<std::string>());
            if (!kind) throw ConfigError("pii config: unknown kind in value pattern");
            cfg.value_patterns_.emplace_back(
                *kind, std::regex(p.at("regex").get<std::string>()));
        }
    }
    return cfg;
}

PiiConfig PiiConfig::load_file(const std::string& path) {
    return from_json(read_file(path));
}

PiiConfig PiiConfig::defaults() {
    static const char* kDefault = R"({
      "keywords": {
        "gender": "gender", "sex": "gender",
        "age": "age", "yob": "age",
        "dob": "birth-date", "birth": "birth-date", "birthdate": "birth-date",
        "birthday": "birth-date",
        "fname": "full-name", "lname": "full-name", "name": "full-name",
        "firstname": "full-name", "lastname": "full-name",
        "email": "email", "mail": "email",
        "phone": "phone", "tel": "phone", "msisdn": "phone",
        "lat": "location", "lon": "location", "lng": "location",
        "city": "location", "zip": "location", "postcode": "location",
        "user": "credentials", "username": "credentials", "login": "credentials",
        "password": "credentials", "pwd": "credentials", "pass": "credentials"
      },
      "value_patterns": [
        {"kind": "email", "regex": "^[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\\.[A-Za-z]{2,}$"},
        {"kind": "phone", "regex": "^\\+[0-9]{7,15}$"},
        {"kind": "age", "regex": "^(19|20)[0-9]{2}$"},
        {"kind": "birth-date", "regex": "^[0-9]{4}-[0-9]{2}-[0-9]{2}$"}
      ]
    })";
    return from_json(kDefault);
}

std::optional<PiiKind> PiiConfig::match_keyword(std::string_view param_name) const {
    auto it = keywords_.find(to_lower(param_name));
    if (it == keywords_.end()) return std::nullopt;
    return it->second;
}

std::optional<PiiKind> PiiConfig::match_value(const std::string& value) const {
    for (const auto& [kind, re] : value_patterns_)
        if (std::regex_match(value, re)) return kind;
    return std::nullopt;
}

std::vector<UniversalIdFinding> detect_universal_ids(const IdRepository& repo,
                                                     const std::string& user,
                                                     const EntityCatalog& catalog) {
    std::vector<UniversalIdFinding> out;
    for (const auto& token : repo.tokens(user)) {
        const auto* owners = repo.owners(user, token);
        if (!owners || owners->size() < 2) continue;
        std::set<std::string> entities;
        for (const auto& o : *owners) entities.insert(catalog.entity_name(o.domain));
        if (entities.size() < 2) continue;
        auto sorted = *owners;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const IdRepository::Owner& a, const IdRepository::Owner& b) {
                             return a.first_seen_ms < b.first_seen_ms;
                         });
        UniversalIdFinding f;
        f.token = token;
        f.user_id = user;
        for (const auto& o : sorted) f.owners.push_back(o.domain);
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<IdSummaryFinding> detect_id_summaries(
    const std::vector<CookieRecord>& cookies, const IdRepository& repo,
    const EntityCatalog& catalog) {
    std::vector<IdSummaryFinding> out;
    for (const auto& c : cookies) {
        std::string setter_entity = catalog.entity_name(c.setter_domain);
        std::set<std::string> seen;
        std::vector<std::string> foreign;
        for (const auto& frag : split_value(c.raw_value)) {
            if (seen.count(frag)) continue;
            const auto* owners = repo.owners(c.user_id, frag);
            if (!owners) continue;
            bool foreign_owner = false;
            for (const auto& o : *owners) {
                if (catalog.entity_name(o.domain) != setter_entity) {
                    foreign_owner = true;
                    break;
                }
            }
            if (foreign_owner) {
                foreign.push_back(frag);
                seen.insert(frag);
            }
        }
        if (foreign.size() >= 2) {
            IdSummaryFinding f;
            f.cookie_record_ref = c.record_ref;
            f.setter = c.setter_domain;
            f.cookie_name = c.name;
            f.foreign_tokens = std::move(foreign);
            f.user_id = c.user_id;
            out.push_back(std::move(f));
        }
    }
    return out;
}

std::vector<SpillFinding> detect_tls_spills(const std::vector<SharingEvent>& events,
                                            const std::vector<CookieRecord>& cookies,
                                            const std::vector<HttpRecord>& records,
                                            const std::vector<std::size_t>& user_refs,
                                            const PublicSuffixList& psl,
                                            const IdPredicate& pred) {
    (void)events;  // spills are defined over raw traffic; events carry no extra info
    // token -> earliest https setter
    std::map<std::string, std::pair<RegistrableDomain, std::int64_t>> secure_tokens;
    for (const auto& c : cookies) {
        if (!c.secure_context) continue;
        for (const auto& t : c.id_tokens) {
            auto it = secure_tokens.find(t);
            if (it == secure_tokens.end() || c.set_at_ms < it->second.second)
                secure_tokens[t] = {c.setter_domain, c.set_at_ms};
        }
    }
    std::vector<SpillFinding> out;
    if (secure_tokens.empty()) return out;
    for (std::size_t ref : user_refs) {
        const HttpRecord& r = records[ref];
        if (r.scheme != Scheme::Http) continue;
        std::set<std::string> seen;  // dedupe per (record, token)
        for (const auto& s : scan_record(r, ref, pred, psl)) {
            auto it = secure_tokens.find(s.token);
            if (it == secure_tokens.end()) continue;
            if (!seen.insert(s.token).second) continue;
            SpillFinding f;
            f.token = s.token;
            f.secure_origin = it->second.first;
            f.plaintext_receiver = s.receiver_domain;
            f.record_ref = ref;
            f.user_id = r.user_id;
            if (r.referrer && r.referrer->rfind("https://", 0) == 0)
                f.leaked_referrer_url = *r.referrer;
            out.push_back(std::move(f));
        }
    }
    return out;
}

std::vector<PiiFinding> scan_pii(const std::vector<HttpRecord>& records,
                                 const std::vector<SharingEvent>& events,
                                 const PiiConfig& cfg) {
    // records carrying an id-sharing or csync event, with the shared token
    std::map<std::size_t, std::string> sharing_records;
    for (const auto& e : events) {
        if (e.status == EventStatus::IdSharing || e.status == EventStatus::CSync)
            sharing_records.emplace(e.record_ref, e.token);
    }
    std::vector<PiiFinding> out;
    for (const auto& [ref, token] : sharing_records) {
        const HttpRecord& r = records[ref];
        for (const auto& [name, value] : r.query) {
            std::optional<PiiKind> kind = cfg.match_keyword(name);
            if (!kind) kind = cfg.match_value(percent_decode(value));
            if (!kind) continue;
            PiiFinding f;
            f.kind = *kind;
            f.param_name = name;
            f.record_ref = ref;
            f.co_synced_token = token;
            f.user_id = r.user_id;
            out.push_back(std::move(f));
        }
    }
    return out;
}

std::map<Category, double> category_shares(const std::vector<SharingEvent>& events,
                                           const EntityCatalog& catalog) {
    std::set<std::string> all_tokens;
    std::map<Category, std::set<std::string>> by_category;
    for (const auto& e : events) {
        if (e.status != EventStatus::CSync) continue;
        all_tokens.insert(e.token);
        by_category[catalog.categorize(e.receiver)].insert(e.token);
    }
    std::map<Category, double> out;
    for (Category c : kAllCategories) {
        auto it = by_category.find(c);
        std::size_t n = it == by_category.end() ? 0 : it->second.size();
        out[c] = all_tokens.empty()
                     ? 0.0
                     : static_cast<double>(n) / static_cast<double>(all_tokens.size());
    }
    return out;
}

UserPrivacyReport compute_user_report(const std::string& user,
                                      const std::vector<SharingEvent>& events,
                                      const std::vector<HttpRecord>& records,
                                      const std::vector<std::size_t>& user_refs,
                                      const std::vector<CookieRecord>& cookies,
                                      const IdRepository& repo,
                                      const EntityCatalog& catalog,
                                      const PublicSuffixList& psl,
                                      const IdPredicate& pred, const PiiConfig& pii,
                                      const PrivacyOptions& opts) {
    UserPrivacyReport rep;
    rep.user_id = user;
    rep.total_requests = user_refs.size();

    auto learner_key = [&](const RegistrableDomain& d) {
        return opts.per_domain_learners ? d.value : catalog.entity_name(d);
    };

    std::optional<std::int64_t> first_ts;
    std::optional<std::int64_t> last_ts;
    for (std::size_t ref : user_refs) {
        const auto& r = records[ref];
        if (!first_ts || r.timestamp_ms < *first_ts) first_ts = r.timestamp_ms;
        if (!last_ts || r.timestamp_ms > *last_ts) last_ts = r.timestamp_ms;
    }
    if (first_ts && last_ts)
        rep.span_days = std::max(
            1.0, static_cast<double>(*last_ts - *first_ts) / 86400000.0);

    // Direct knowledge: entities that set a cookie ID for this user, plus
    // receivers of first sightings (they observed the ID with no sync
    // having propagated it).
    std::set<std::string> before;
    for (const auto& token : repo.tokens(user)) {
        for (const auto& o : *repo.owners(user, token)) before.insert(learner_key(o.domain));
    }

    std::optional<std::int64_t> first_csync;
    std::map<std::string, std::set<std::string>> token_receivers;
    std::set<std::string> after;
    for (const auto& e : events) {
        if (e.status == EventStatus::FirstSeen) before.insert(learner_key(e.receiver));
        if (e.status != EventStatus::CSync) continue;
        ++rep.csync_events;
        if (!first_csync || e.timestamp_ms < *first_csync) first_csync = e.timestamp_ms;
        token_receivers[e.token].insert(learner_key(e.receiver));
        after.insert(learner_key(e.receiver));
    }
    after.insert(before.begin(), before.end());

    rep.learners_before = before.size();
    rep.learners_after = after.size();
    rep.diffusion_factor =
        before.empty() ? 1.0
                       : static_cast<double>(after.size()) / static_cast<double>(before.size());
    if (first_csync && first_ts) rep.time_to_first_csync_ms = *first_csync - *first_ts;
    if (rep.total_requests > 0)
        rep.csync_per_request = static_cast<double>(rep.csync_events) /
                                static_cast<double>(rep.total_requests);
    rep.unique_ids_synced = token_receivers.size();
    for (const auto& [token, receivers] : token_receivers)
        rep.per_id_receiver_counts[token] = receivers.size();

    rep.tls_spills = detect_tls_spills(events, cookies, records, user_refs, psl, pred);
    rep.pii_leaks = scan_pii(records, events, pii);
    rep.universal_ids = detect_universal_ids(repo, user, catalog);
    rep.id_summaries = detect_id_summaries(cookies, repo, catalog);
    return rep;
}

Percentiles percentiles(std::vector<double> values) {
    Percentiles p;
    if (values.empty()) return p;
    std::sort(values.begin(), values.end());
    auto at = [&](double q) {
        double pos = q * static_cast<double>(values.size() - 1);
        std::size_t lo = static_cast<std::size_t>(std::floor(pos));
        std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
        double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    p.p10 = at(0.10);
    p.p25 = at(0.25);
    p.p50 = at(0.50);
    p.p75 = at(0.75);
    p.p90 = at(0.90);
    return p;
}

PrivacyReport compute_report(const std::vector<SharingEvent>& events,
                             const std::vector<HttpRecord>& records,
                             const std::vector<CookieRecord>& cookies,
                             const IdRepository& repo, const EntityCatalog& catalog,
                             const PublicSuffixList& psl, const IdPredicate& pred,
                             const PiiConfig& pii, const PrivacyOptions& opts) {
    PrivacyReport rep;
    auto groups = group_by_user(records);

    std::unordered_map<std::string, std::vector<SharingEvent>> events_by_user;
    for (const auto& e : events) events_by_user[e.user_id].push_back(e);
    std::unordered_map<std::string, std::vector<CookieRecord>> cookies_by_user;
    for (const auto& c : cookies) cookies_by_user[c.user_id].push_back(c);

    std::vector<double> v_cpr, v_ids, v_diff, v_ttf, v_recv;
    std::map<Carrier, std::size_t> carrier_counts;
    std::size_t total_csync = 0;

    for (const auto& [user, refs] : groups) {
        auto rep_user = compute_user_report(user, events_by_user[user], records, refs,
                                            cookies_by_user[user], repo, catalog, psl,
                                            pred, pii, opts);
        ++rep.aggregate.users;
        double per_day = rep_user.span_days > 0
                             ? static_cast<double>(rep_user.total_requests) / rep_user.span_days
                             : static_cast<double>(rep_user.total_requests);
        if (per_day > opts.regular_user_threshold) {
            ++rep.aggregate.regular_users;
            if (rep_user.csync_events > 0) ++rep.aggregate.exposed_regular_users;
        }
        v_cpr.push_back(rep_user.csync_per_request);
        v_ids.push_back(static_cast<double>(rep_user.unique_ids_synced));
        v_diff.push_back(rep_user.diffusion_factor);
        if (rep_user.time_to_first_csync_ms)
            v_ttf.push_back(static_cast<double>(*rep_user.time_to_first_csync_ms));
        for (const auto& [token, n] : rep_user.per_id_receiver_counts)
            v_recv.push_back(static_cast<double>(n));
        rep.aggregate.universal_ids += rep_user.universal_ids.size();
        rep.aggregate.id_summaries += rep_user.id_summaries.size();
        rep.aggregate.tls_spills += rep_user.tls_spills.size();
        for (const auto& f : rep_user.pii_leaks) ++rep.aggregate.pii_by_kind[f.kind];
        rep.users.push_back(std::move(rep_user));
    }

    for (const auto& e : events) {
        if (e.status != EventStatus::CSync) continue;
        ++total_csync;
        ++carrier_counts[e.carrier];
    }
    for (const auto& [c, n] : carrier_counts)
        rep.aggregate.carrier_breakdown[c] =
            total_csync == 0 ? 0.0 : static_cast<double>(n) / static_cast<double>(total_csync);

    rep.aggregate.exposure_rate =
        rep.aggregate.regular_users == 0
            ? 0.0
            : static_cast<double>(rep.aggregate.exposed_regular_users) /
                  static_cast<double>(rep.aggregate.regular_users);
    rep.aggregate.csync_per_request = percentiles(v_cpr);
    rep.aggregate.unique_ids_synced = percentiles(v_ids);
    rep.aggregate.diffusion_factor = percentiles(v_diff);
    rep.aggregate.time_to_first_csync_ms = percentiles(v_ttf);
    rep.aggregate.receivers_per_token = percentiles(v_recv);
    rep.aggregate.category_shares = category_shares(events, catalog);
    return rep;
}

namespace {

json percentiles_json(const Percentiles& p) {
    return json{{"p10", p.p10}, {"p25", p.p25}, {"p50", p.p50},
                {"p75", p.p75}, {"p90", p.p90}};
}

json spill_json(const SpillFinding& f) {
    return json{{"token", f.token},
                {"secure_origin", f.secure_origin.value},
                {"plaintext_receiver", f.plaintext_receiver.value},
                {"leaked_referrer_url",
                 f.leaked_referrer_url ? json(*f.leaked_referrer_url) : json(nullptr)},
                {"record", f.record_ref}};
}

}  // namespace

std::string report_to_json(const PrivacyReport& r) {
    json root;
    root["version"] = 1;
    json users = json::array();
    for (const auto& u : r.users) {
        json ju;
        ju["user"] = u.user_id;
        ju["total_requests"] = u.total_requests;
        ju["csync_events"] = u.csync_events;
        ju["time_to_first_csync_ms"] =
            u.time_to_first_csync_ms ? json(*u.time_to_first_csync_ms) : json(nullptr);
        ju["csync_per_request"] = u.csync_per_request;
        ju["unique_ids_synced"] = u.unique_ids_synced;
        ju["per_id_receiver_counts"] = u.per_id_receiver_counts;
        ju["learners_before"] = u.learners_before;
        ju["learners_after"] = u.learners_after;
        ju["diffusion_factor"] = u.diffusion_factor;
        json spills = json::array();
        for (const auto& f : u.tls_spills) spills.push_back(spill_json(f));
        ju["tls_spills"] = std::move(spills);
        json piis = json::array();
        for (const auto& f : u.pii_leaks)
            piis.push_back(json{{"kind", pii_kind_name(f.kind)},
                                {"param", f.param_name},
                                {"record", f.record_ref},
                                {"co_synced_token", f.co_synced_token}});
        ju["pii_leaks"] = std::move(piis);
        json unis = json::array();
        for (const auto& f : u.universal_ids) {
            json owners = json::array();
            for (const auto& d : f.owners) owners.push_back(d.value);
            unis.push_back(json{{"token", f.token}, {"owners", std::move(owners)}});
        }
        ju["universal_ids"] = std::move(unis);
        json sums = json::array();
        for (const auto& f : u.id_summaries)
            sums.push_back(json{{"setter", f.setter.value},
                                {"cookie_name", f.cookie_name},
                                {"record", f.cookie_record_ref},
                                {"foreign_tokens", f.foreign_tokens}});
        ju["id_summaries"] = std::move(sums);
        users.push_back(std::move(ju));
    }
    root["users"] = std::move(users);

    const AggregateReport& a = r.aggregate;
    json ja;
    ja["users"] = a.users;
    ja["regular_users"] = a.regular_users;
    ja["exposed_regular_users"] = a.exposed_regular_users;
    ja["exposure_rate"] = a.exposure_rate;
    ja["csync_per_request"] = percentiles_json(a.csync_per_request);
    ja["unique_ids_synced"] = percentiles_json(a.unique_ids_synced);
    ja["diffusion_factor"] = percentiles_json(a.diffusion_factor);
    ja["time_to_first_csync_ms"] = percentiles_json(a.time_to_first_csync_ms);
    ja["receivers_per_token"] = percentiles_json(a.receivers_per_token);
    json carriers = json::object();
    for (const auto& [c, v] : a.carrier_breakdown) carriers[carrier_name(c)] = v;
    ja["carrier_breakdown"] = std::move(carriers);
    json cats = json::object();
    for (const auto& [c, v] : a.category_shares) cats[category_name(c)] = v;
    ja["category_shares"] = std::move(cats);
    ja["universal_ids"] = a.universal_ids;
    ja["id_summaries"] = a.id_summaries;
    ja["tls_spills"] = a.tls_spills;
    json piik = json::object();
    for (const auto& [k, n] : a.pii_by_kind) piik[pii_kind_name(k)] = n;
    ja["pii_by_kind"] = std::move(piik);
    root["aggregate"] = std::move(ja);
    return root.dump(2);
}

std::string report_to_csv(const PrivacyReport& r) {
    std::ostringstream out;
    out << "user,total_requests,csync_events,csync_per_request,unique_ids_synced,"
           "learners_before,learners_after,diffusion_factor,time_to_first_csync_ms,"
           "tls_spills,pii_leaks,universal_ids,id_summaries\n";
    for (const auto& u : r.users) {
        out << u.user_id << ',' << u.total_requests << ',' << u.csync_events << ','
            << u.csync_per_request << ',' << u.unique_ids_synced << ','
            << u.learners_before << ',' << u.learners_after << ',' << u.diffusion_factor
            << ',';
        if (u.time_to_first_csync_ms) out << *u.time_to_first_csync_ms;
        out << ',' << u.tls_spills.size() << ',' << u.pii_leaks.size() << ','
            << u.universal_ids.size() << ',' << u.id_summaries.size() << '\n';
    }
    return out.str();
}

}  // namespace conrad
