#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "conrad/public_suffix.hpp"
#include "conrad/util.hpp"

namespace conrad {

enum class Scheme { Http, Https };

inline const char* scheme_name(Scheme s) { return s == Scheme::Https ? "https" : "http"; }

// One observed HTTP(S) request/response pair, normalized from a proxy log,
// HAR capture or the toolkit's own JSONL format.
struct HttpRecord {
    std::string user_id;
    std::int64_t timestamp_ms = 0;
    std::string method;
    Scheme scheme = Scheme::Http;
    std::string host;  // non-empty, lowercase
    std::string path;  // starts with '/'
    std::vector<std::pair<std::string, std::string>> query;  // raw values, observed order
    std::optional<int> status;
    std::optional<std::string> referrer;
    std::optional<std::string> location;
    std::vector<std::string> set_cookies;
    std::vector<std::pair<std::string, std::string>> cookies_sent;
    std::optional<std::string> user_agent;

    bool operator==(const HttpRecord&) const = default;

    std::string url() const;  // scheme://host/path?query (raw)
};

struct IngestOptions {
    // Records whose user agent matches one of these substrings are dropped
    // (app-traffic filter); empty by default.
    std::vector<std::string> ua_denylist;
    // Hard-failure threshold for malformed weblog lines.
    double max_malformed_fraction = 0.10;
};

struct IngestResult {
    std::vector<HttpRecord> records;
    std::size_t skipped = 0;           // malformed / incomplete entries
    std::size_t ua_filtered = 0;       // dropped by the UA denylist
    bool out_of_order = false;         // weblog timestamps not monotone
    std::vector<std::string> warnings; // one message per skipped entry
};

// Newline-delimited JSON, one record per line (schema in the README).
// Malformed lines are skipped with a warning; more than
// max_malformed_fraction of bad lines raises DataError.
IngestResult ingest_weblog(std::istream& in, const IngestOptions& opts = {});
IngestResult ingest_weblog_file(const std::string& path, const IngestOptions& opts = {});

// HAR 1.2. The archive carries no user identity, so the caller supplies the
// pseudonym for every entry. Entries are sorted by startedDateTime.
IngestResult ingest_har(std::istream& in, const std::string& user_label,
                        const IngestOptions& opts = {});
IngestResult ingest_har_file(const std::string& path, const std::string& user_label,
                             const IngestOptions& opts = {});

std::string record_to_jsonl(const HttpRecord& r);
std::string records_to_jsonl(const std::vector<HttpRecord>& records);
void write_jsonl_file(const std::string& path, const std::vector<HttpRecord>& records);

// Stable sort by timestamp; preserves input order for ties. Detection
// operates on the sorted stream, record_refs index into it.
void sort_by_time(std::vector<HttpRecord>& records);

// Per-user views into a time-sorted record vector (indices, stream order).
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_user(
    const std::vector<HttpRecord>& records);

}  // namespace conrad
