#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "conrad/cookies.hpp"
#include "conrad/entities.hpp"
#include "conrad/id_scanner.hpp"
#include "conrad/traffic.hpp"

namespace conrad {

enum class EventStatus { FirstSeen, IdSharing, CSync, FilteredSameProvider };
const char* event_status_name(EventStatus s);
std::optional<EventStatus> event_status_from_name(std::string_view s);

enum class InitiatorClass {
    PublisherOwnId,         // publisher syncs the ID it assigned
    ThirdPartyOwnId,        // embedded third party syncs its own ID
    ThirdPartyRelayOwnId,   // third party in a sync chain shares its own ID
    ThirdPartyRelayPublisherId,  // third party relays the publisher's ID
    Unattributed,
};
const char* initiator_name(InitiatorClass c);
std::optional<InitiatorClass> initiator_from_name(std::string_view s);

struct SharingEvent {
    std::string user_id;
    std::string token;
    std::optional<RegistrableDomain> sender;  // referrer host, else prior holder
    RegistrableDomain receiver;
    Carrier carrier = Carrier::Param;
    std::optional<std::string> param_name;
    std::size_t record_ref = 0;
    std::int64_t timestamp_ms = 0;
    EventStatus status = EventStatus::FirstSeen;
    std::optional<InitiatorClass> initiator;  // attributed CSync events only

    bool operator==(const SharingEvent&) const = default;
};

// Records linked by Location-URL -> request-URL matches (or referrer
// linkage) for one user; singletons for everything unchained.
struct RedirectChain {
    std::vector<std::size_t> record_refs;
};

enum class DetectMode { TwoPass, Streaming };

struct DetectorConfig {
    DetectMode mode = DetectMode::TwoPass;
    // In two-pass mode, require the matched cookie to have been set at or
    // before the sharing timestamp.
    bool enforce_causality = true;
    std::int64_t chain_window_ms = 5000;
    // 0 disables deduplication; otherwise repeated (token, receiver) events
    // within the window are suppressed.
    std::int64_t dedupe_window_ms = 0;
    ScanOptions scan;
};

struct StageCounters {
    std::size_t records = 0;
    std::size_t sightings = 0;
    std::size_t first_seen = 0;
    std::size_t id_sharing = 0;  // IdSharing + FilteredSameProvider + CSync
    std::size_t filtered_same_provider = 0;
    std::size_t csync = 0;
};

// Per-user page-visit model: which records look like first-party page
// navigations, and who the current publisher is at any timestamp.
class PageTimeline {
public:
    static PageTimeline build(const std::vector<HttpRecord>& records,
                              const std::vector<std::size_t>& user_refs,
                              const PublicSuffixList& psl);

    // Registrable domain of the most recent page visit at or before ts.
    std::optional<RegistrableDomain> publisher_at(std::int64_t ts) const;
    bool is_page_visit(std::size_t record_ref) const;
    const std::vector<std::size_t>& page_refs() const { return page_refs_; }

private:
    std::vector<std::size_t> page_refs_;                 // sorted by time
    std::vector<std::pair<std::int64_t, RegistrableDomain>> timeline_;
};

// Steps 2-3 of the heuristic pipeline for one user's time-sorted stream:
// first sighting of a token registers its holder; a later sighting at a
// different domain is an ID-sharing event; same-provider shares are
// filtered; surviving shares whose token matches a repository cookie ID
// are confirmed CSync.
std::vector<SharingEvent> process_stream(const std::vector<HttpRecord>& records,
                                         const std::vector<std::size_t>& user_refs,
                                         const IdRepository& repo,
                                         const EntityCatalog& catalog,
                                         const PublicSuffixList& psl,
                                         const IdPredicate& pred,
                                         const DetectorConfig& cfg,
                                         StageCounters* counters = nullptr);

std::vector<RedirectChain> build_chains(const std::vector<HttpRecord>& records,
                                        const std::vector<std::size_t>& user_refs,
                                        const PublicSuffixList& psl,
                                        const DetectorConfig& cfg);

// Table-4 style attribution for one confirmed CSync event.
InitiatorClass attribute_initiator(const SharingEvent& e,
                                   const std::vector<RedirectChain>& chains,
                                   const std::vector<SharingEvent>& user_events,
                                   const IdRepository& repo,
                                   const EntityCatalog& catalog,
                                   const PageTimeline& pages,
                                   const std::vector<HttpRecord>& records,
                                   const PublicSuffixList& psl);

// Runs detection for every user in the stream. Records must be time-sorted.
// Attribution is filled in for CSync events when attribute=true.
std::vector<SharingEvent> detect_all(const std::vector<HttpRecord>& records,
                                     const IdRepository& repo,
                                     const EntityCatalog& catalog,
                                     const PublicSuffixList& psl,
                                     const IdPredicate& pred, const DetectorConfig& cfg,
                                     bool attribute, StageCounters* counters = nullptr);

std::string event_to_jsonl(const SharingEvent& e);
SharingEvent event_from_jsonl(const std::string& line);
std::string events_to_jsonl(const std::vector<SharingEvent>& events);
std::vector<SharingEvent> events_from_jsonl_text(const std::string& text);

}  // namespace conrad
