#include "conrad/detector.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "conrad/util.hpp"

namespace conrad {

using nlohmann::json;

const char* event_status_name(EventStatus s) {
    switch (s) {
        case EventStatus::FirstSeen: return "first-seen";
        case EventStatus::IdSharing: return "id-sharing";
        case EventStatus::CSync: return "csync";
        case EventStatus::FilteredSameProvider: return "filtered-same-provider";
    }
    return "first-seen";
}

std::optional<EventStatus> event_status_from_name(std::string_view s) {
    if (s == "first-seen") return EventStatus::FirstSeen;
    if (s == "id-sharing") return EventStatus::IdSharing;
    if (s == "csync") return EventStatus::CSync;
    if (s == "filtered-same-provider") return EventStatus::FilteredSameProvider;
    return std::nullopt;
}

const char* initiator_name(InitiatorClass c) {
    switch (c) {
        case InitiatorClass::PublisherOwnId: return "publisher-own-id";
        case InitiatorClass::ThirdPartyOwnId: return "third-party-own-id";
        case InitiatorClass::ThirdPartyRelayOwnId: return "third-party-relay-own-id";
        case InitiatorClass::ThirdPartyRelayPublisherId:
            return "third-party-relay-publisher-id";
        case InitiatorClass::Unattributed: return "unattributed";
    }
    return "unattributed";
}

std::optional<InitiatorClass> initiator_from_name(std::string_view s) {
    if (s == "publisher-own-id") return InitiatorClass::PublisherOwnId;
    if (s == "third-party-own-id") return InitiatorClass::ThirdPartyOwnId;
    if (s == "third-party-relay-own-id") return InitiatorClass::ThirdPartyRelayOwnId;
    if (s == "third-party-relay-publisher-id")
        return InitiatorClass::ThirdPartyRelayPublisherId;
    if (s == "unattributed") return InitiatorClass::Unattributed;
    return std::nullopt;
}

namespace {

bool looks_like_asset(const std::string& path) {
    static const char* kExts[] = {".js",  ".css",  ".png", ".jpg", ".jpeg", ".gif",
                                  ".ico", ".svg",  ".woff", ".woff2", ".ttf", ".webp",
                                  ".mp4", ".webm", ".swf", ".xml", ".json", ".txt"};
    auto q = path.find('?');
    std::string p = q == std::string::npos ? path : path.substr(0, q);
    std::string lower = to_lower(p);
    for (const char* ext : kExts) {
        std::string_view e(ext);
        if (lower.size() >= e.size() &&
            lower.compare(lower.size() - e.size(), e.size(), e) == 0)
            return true;
    }
    return false;
}

}  // namespace

PageTimeline PageTimeline::build(const std::vector<HttpRecord>& records,
                                 const std::vector<std::size_t>& user_refs,
                                 const PublicSuffixList& psl) {
    PageTimeline tl;
    // Last stream position (within this user) where each host shows up as a
    // referrer host of some record.
    std::unordered_map<std::string, std::size_t> last_referrer_pos;
    for (std::size_t pos = 0; pos < user_refs.size(); ++pos) {
        const HttpRecord& r = records[user_refs[pos]];
        if (!r.referrer) continue;
        if (auto u = parse_url(*r.referrer)) last_referrer_pos[u->host] = pos;
    }
    for (std::size_t pos = 0; pos < user_refs.size(); ++pos) {
        const HttpRecord& r = records[user_refs[pos]];
        bool referenced_later = false;
        auto it = last_referrer_pos.find(r.host);
        if (it != last_referrer_pos.end() && it->second > pos) referenced_later = true;
        bool nav_shape = !r.referrer && (r.method == "GET" || r.method.empty()) &&
                         !looks_like_asset(r.path);
        if (!referenced_later && !nav_shape) continue;
        tl.page_refs_.push_back(user_refs[pos]);
        auto rd = psl.registrable_domain(r.host);
        tl.timeline_.emplace_back(r.timestamp_ms,
                                  rd ? *rd : RegistrableDomain{r.host});
    }
    return tl;
}

std::optional<RegistrableDomain> PageTimeline::publisher_at(std::int64_t ts) const {
    std::optional<RegistrableDomain> out;
    for (const auto& [t, rd] : timeline_) {
        if (t > ts) break;
        out = rd;
    }
    return out;
}

bool PageTimeline::is_page_visit(std::size_t record_ref) const {
    return std::find(page_refs_.begin(), page_refs_.end(), record_ref) !=
           page_refs_.end();
}

std::vector<SharingEvent> process_stream(const std::vector<HttpRecord>& records,
                                         const std::vector<std::size_t>& user_refs,
                                         const IdRepository& repo,
                                         const EntityCatalog& catalog,
                                         const PublicSuffixList& psl,
                                         const IdPredicate& pred,
                                         const DetectorConfig& cfg,
                                         StageCounters* counters) {
    struct TokenState {
        RegistrableDomain first_holder;
        RegistrableDomain last_holder;
    };
    std::unordered_map<std::string, TokenState> state;
    // Streaming mode matches against cookies recorded so far only.
    IdRepository streaming_repo;
    const bool streaming = cfg.mode == DetectMode::Streaming;

    std::unordered_map<std::string, std::int64_t> dedupe_last;  // token\x1freceiver
    std::vector<SharingEvent> events;

    for (std::size_t ref : user_refs) {
        const HttpRecord& r = records[ref];
        if (counters) ++counters->records;

        for (auto& sighting : scan_record(r, ref, pred, psl, cfg.scan)) {
            if (counters) ++counters->sightings;
            SharingEvent e;
            e.user_id = r.user_id;
            e.token = std::move(sighting.token);
            e.receiver = sighting.receiver_domain;
            e.carrier = sighting.carrier;
            e.param_name = std::move(sighting.param_name);
            e.record_ref = ref;
            e.timestamp_ms = r.timestamp_ms;

            auto it = state.find(e.token);
            if (it == state.end()) {
                state.emplace(e.token, TokenState{e.receiver, e.receiver});
                e.sender = sighting.sender_hint;
                e.status = EventStatus::FirstSeen;
                if (counters) ++counters->first_seen;
                events.push_back(std::move(e));
                continue;
            }
            TokenState& ts = it->second;
            if (e.receiver == ts.first_holder) {
                // repeat at the origin domain: not a share
                ts.last_holder = e.receiver;
                continue;
            }
            e.sender = sighting.sender_hint ? sighting.sender_hint
                                            : std::optional<RegistrableDomain>(ts.last_holder);
            if (counters) ++counters->id_sharing;
            if (e.sender && catalog.same_provider(*e.sender, e.receiver)) {
                e.status = EventStatus::FilteredSameProvider;
                if (counters) ++counters->filtered_same_provider;
            } else {
                const IdRepository& lookup = streaming ? streaming_repo : repo;
                bool matched = lookup.contains(r.user_id, e.token);
                if (matched && !streaming && cfg.enforce_causality) {
                    auto set_ms = lookup.earliest_set_ms(r.user_id, e.token);
                    matched = set_ms && *set_ms <= r.timestamp_ms;
                }
                e.status = matched ? EventStatus::CSync : EventStatus::IdSharing;
                if (matched && counters) ++counters->csync;
            }
            ts.last_holder = e.receiver;

            if (cfg.dedupe_window_ms > 0) {
                std::string key = e.token + '\x1f' + e.receiver.value;
                auto dit = dedupe_last.find(key);
                if (dit != dedupe_last.end() &&
                    r.timestamp_ms - dit->second <= cfg.dedupe_window_ms) {
                    continue;  // counted above, suppressed from output
                }
                dedupe_last[key] = r.timestamp_ms;
            }
            events.push_back(std::move(e));
        }

        if (streaming) {
            // apply this record's Set-Cookie headers after scanning it: the
            // response can only influence later requests
            for (const auto& header : r.set_cookies) {
                auto res = parse_set_cookie(header, r, ref, psl, pred);
                if (res.accepted()) streaming_repo.record(*res.cookie);
            }
        }
    }
    return events;
}

std::vector<RedirectChain> build_chains(const std::vector<HttpRecord>& records,
                                        const std::vector<std::size_t>& user_refs,
                                        const PublicSuffixList& psl,
                                        const DetectorConfig& cfg) {
    PageTimeline pages = PageTimeline::build(records, user_refs, psl);

    struct OpenTail {
        std::size_t chain_idx;
        std::int64_t deadline_ms;
        std::optional<std::string> expected_url;  // from Location
        std::string tail_url;                     // for referrer linkage
    };
    std::vector<RedirectChain> chains;
    std::vector<OpenTail> open;
    std::optional<RegistrableDomain> current_page;

    auto resolve_location = [&](const HttpRecord& r) -> std::optional<std::string> {
        if (!r.location) return std::nullopt;
        bool redirectish = !r.status || (*r.status >= 300 && *r.status < 400);
        if (!redirectish) return std::nullopt;
        if (r.location->find("://") != std::string::npos) return *r.location;
        if (!r.location->empty() && (*r.location)[0] == '/')
            return std::string(scheme_name(r.scheme)) + "://" + r.host + *r.location;
        return *r.location;
    };

    for (std::size_t ref : user_refs) {
        const HttpRecord& r = records[ref];

        if (pages.is_page_visit(ref)) {
            auto rd = psl.registrable_domain(r.host);
            RegistrableDomain page_rd = rd ? *rd : RegistrableDomain{r.host};
            if (!current_page || !(*current_page == page_rd)) open.clear();
            current_page = page_rd;
        }

        // expire stale tails
        std::erase_if(open, [&](const OpenTail& t) { return t.deadline_ms < r.timestamp_ms; });

        const std::string url = r.url();
        std::size_t chain_idx = SIZE_MAX;
        for (std::size_t i = 0; i < open.size(); ++i) {
            if (open[i].expected_url && *open[i].expected_url == url) {
                chain_idx = open[i].chain_idx;
                open.erase(open.begin() + static_cast<std::ptrdiff_t>(i));
                break;
            }
        }
        if (chain_idx == SIZE_MAX && r.referrer) {
            // referrer linkage: the referrer names a prior third-party hop,
            // not the page the user is on
            for (std::size_t i = 0; i < open.size(); ++i) {
                if (open[i].tail_url == *r.referrer) {
                    chain_idx = open[i].chain_idx;
                    open.erase(open.begin() + static_cast<std::ptrdiff_t>(i));
                    break;
                }
            }
        }
        if (chain_idx == SIZE_MAX) {
            chain_idx = chains.size();
            chains.push_back({});
        }
        chains[chain_idx].record_refs.push_back(ref);

        if (auto next = resolve_location(r)) {
            open.push_back({chain_idx, r.timestamp_ms + cfg.chain_window_ms,
                            std::move(next), url});
        } else if (!pages.is_page_visit(ref)) {
            // keep the tail around for referrer linkage even without Location
            open.push_back({chain_idx, r.timestamp_ms + cfg.chain_window_ms,
                            std::nullopt, url});
        }
    }
    return chains;
}

InitiatorClass attribute_initiator(const SharingEvent& e,
                                   const std::vector<RedirectChain>& chains,
                                   const std::vector<SharingEvent>& user_events,
                                   const IdRepository& repo,
                                   const EntityCatalog& catalog,
                                   const PageTimeline& pages,
                                   const std::vector<HttpRecord>& records,
                                   const PublicSuffixList& psl) {
    auto publisher = pages.publisher_at(e.timestamp_ms);
    auto owner = repo.earliest_owner(e.user_id, e.token);
    if (!publisher || !owner) return InitiatorClass::Unattributed;

    bool owner_is_publisher = catalog.same_provider(*owner, *publisher);

    // position of the carrying record in its chain
    std::size_t position = 0;
    const RedirectChain* chain = nullptr;
    for (const auto& c : chains) {
        auto it = std::find(c.record_refs.begin(), c.record_refs.end(), e.record_ref);
        if (it != c.record_refs.end()) {
            chain = &c;
            position = static_cast<std::size_t>(it - c.record_refs.begin());
            break;
        }
    }
    bool prior_sync_hop = false;
    if (chain && position > 0) {
        std::unordered_set<std::size_t> earlier(chain->record_refs.begin(),
                                                chain->record_refs.begin() +
                                                    static_cast<std::ptrdiff_t>(position));
        for (const auto& ev : user_events) {
            if (ev.status != EventStatus::FirstSeen && earlier.count(ev.record_ref)) {
                prior_sync_hop = true;
                break;
            }
        }
    }

    bool referrer_is_publisher_page = false;
    const HttpRecord& rec = records[e.record_ref];
    if (rec.referrer) {
        if (auto u = parse_url(*rec.referrer)) {
            auto rd = psl.registrable_domain(u->host);
            if (rd && *rd == *publisher) referrer_is_publisher_page = true;
        }
    }

    if (owner_is_publisher) {
        if (prior_sync_hop) return InitiatorClass::ThirdPartyRelayPublisherId;
        if (referrer_is_publisher_page) return InitiatorClass::PublisherOwnId;
    } else {
        if (prior_sync_hop) return InitiatorClass::ThirdPartyRelayOwnId;
        if (referrer_is_publisher_page) return InitiatorClass::ThirdPartyOwnId;
    }
    return InitiatorClass::Unattributed;
}

std::vector<SharingEvent> detect_all(const std::vector<HttpRecord>& records,
                                     const IdRepository& repo,
                                     const EntityCatalog& catalog,
                                     const PublicSuffixList& psl,
                                     const IdPredicate& pred, const DetectorConfig& cfg,
                                     bool attribute, StageCounters* counters) {
    std::vector<SharingEvent> all;
    for (const auto& [user, refs] : group_by_user(records)) {
        auto events = process_stream(records, refs, repo, catalog, psl, pred, cfg,
                                     counters);
        if (attribute) {
            auto chains = build_chains(records, refs, psl, cfg);
            PageTimeline pages = PageTimeline::build(records, refs, psl);
            for (auto& e : events) {
                if (e.status == EventStatus::CSync)
                    e.initiator = attribute_initiator(e, chains, events, repo, catalog,
                                                      pages, records, psl);
            }
        }
        all.insert(all.end(), std::make_move_iterator(events.begin()),
                   std::make_move_iterator(events.end()));
    }
    std::stable_sort(all.begin(), all.end(),
                     [](const SharingEvent& a, const SharingEvent& b) {
                         return a.record_ref < b.record_ref;
                     });
    return all;
}

std::string event_to_jsonl(const SharingEvent& e) {
    json j;
    j["user"] = e.user_id;
    j["token"] = e.token;
    j["sender"] = e.sender ? json(e.sender->value) : json(nullptr);
    j["receiver"] = e.receiver.value;
    j["carrier"] = carrier_name(e.carrier);
    j["param"] = e.param_name ? json(*e.param_name) : json(nullptr);
    j["record"] = e.record_ref;
    j["ts"] = e.timestamp_ms;
    j["status"] = event_status_name(e.status);
    j["initiator"] = e.initiator ? json(initiator_name(*e.initiator)) : json(nullptr);
    return j.dump();
}

SharingEvent event_from_jsonl(const std::string& line) {
    json j = json::parse(line);
    SharingEvent e;
    e.user_id = j.at("user").get<std::string>();
    e.token = j.at("token").get<std::string>();
    if (!j.at("sender").is_null())
        e.sender = RegistrableDomain{j["sender"].get<std::string>()};
    e.receiver.value = j.at("receiver").get<std::string>();
    auto c = carrier_from_name(j.at("carrier").get<std::string>());
    if (!c) throw ParseError("bad carrier");
    e.carrier = *c;
    if (!j.at("param").is_null()) e.param_name = j["param"].get<std::string>();
    e.record_ref = j.at("record").get<std::size_t>();
    e.timestamp_ms = j.at("ts").get<std::int64_t>();
    auto s = event_status_from_name(j.at("status").get<std::string>());
    if (!s) throw ParseError("bad status");
    e.status = *s;
    if (j.contains("initiator") && !j["initiator"].is_null()) {
        auto i = initiator_from_name(j["initiator"].get<std::string>());
        if (!i) throw ParseError("bad initiator");
        e.initiator = *i;
    }
    return e;
}

std::string events_to_jsonl(const std::vector<SharingEvent>& events) {
    std::string out;
    for (const auto& e : events) {
        out += event_to_jsonl(e);
        out += '\n';
    }
    return out;
}

std::vector<SharingEvent> events_from_jsonl_text(const std::string& text) {
    std::vector<SharingEvent> out;
    for (const std::string& line : split(text, '\n')) {
        if (trim(line).empty()) continue;
        out.push_back(event_from_jsonl(line));
    }
    return out;
}

}  // namespace conrad
