#include "conrad/traffic.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace conrad {

using nlohmann::json;

std::string HttpRecord::url() const {
    std::string out = scheme_name(scheme);
    out += "://";
    out += host;
    out += path;
    if (!query.empty()) {
        out += '?';
        bool first = true;
        for (const auto& [k, v] : query) {
            if (!first) out += '&';
            first = false;
            out += k;
            out += '=';
            out += v;
        }
    }
    return out;
}

static json pairs_to_json(const std::vector<std::pair<std::string, std::string>>& v) {
    json arr = json::array();
    for (const auto& [k, val] : v) arr.push_back(json::array({k, val}));
    return arr;
}

static std::vector<std::pair<std::string, std::string>> pairs_from_json(const json& arr) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& item : arr) {
        if (!item.is_array() || item.size() != 2) throw ParseError("query pair malformed");
        out.emplace_back(item[0].get<std::string>(), item[1].get<std::string>());
    }
    return out;
}

std::string record_to_jsonl(const HttpRecord& r) {
    json j;
    j["user"] = r.user_id;
    j["ts"] = r.timestamp_ms;
    j["method"] = r.method;
    j["scheme"] = scheme_name(r.scheme);
    j["host"] = r.host;
    j["path"] = r.path;
    j["query"] = pairs_to_json(r.query);
    j["status"] = r.status ? json(*r.status) : json(nullptr);
    j["referrer"] = r.referrer ? json(*r.referrer) : json(nullptr);
    j["location"] = r.location ? json(*r.location) : json(nullptr);
    j["set_cookies"] = r.set_cookies;
    j["cookies"] = pairs_to_json(r.cookies_sent);
    j["ua"] = r.user_agent ? json(*r.user_agent) : json(nullptr);
    return j.dump();
}

std::string records_to_jsonl(const std::vector<HttpRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_jsonl(r);
        out += '\n';
    }
    return out;
}

void write_jsonl_file(const std::string& path, const std::vector<HttpRecord>& records) {
    write_file(path, records_to_jsonl(records));
}

static HttpRecord record_from_json(const json& j) {
    HttpRecord r;
    r.user_id = j.at("user").get<std::string>();
    r.timestamp_ms = j.at("ts").get<std::int64_t>();
    r.method = j.at("method").get<std::string>();
    std::string scheme = j.at("scheme").get<std::string>();
    if (scheme == "http")
        r.scheme = Scheme::Http;
    else if (scheme == "https")
        r.scheme = Scheme::Https;
    else
        throw ParseError("scheme must be http or https");
    r.host = to_lower(j.at("host").get<std::string>());
    if (r.host.empty()) throw ParseError("host empty");
    if (r.timestamp_ms <= 0) throw ParseError("timestamp not positive");
    r.path = j.at("path").get<std::string>();
    if (r.path.empty() || r.path[0] != '/') r.path.insert(r.path.begin(), '/');
    r.query = pairs_from_json(j.at("query"));
    if (j.contains("status") && !j["status"].is_null()) r.status = j["status"].get<int>();
    if (j.contains("referrer") && !j["referrer"].is_null())
        r.referrer = j["referrer"].get<std::string>();
    if (j.contains("location") && !j["location"].is_null())
        r.location = j["location"].get<std::string>();
    if (j.contains("set_cookies"))
        r.set_cookies = j["set_cookies"].get<std::vector<std::string>>();
    if (j.contains("cookies")) r.cookies_sent = pairs_from_json(j["cookies"]);
    if (j.contains("ua") && !j["ua"].is_null()) r.user_agent = j["ua"].get<std::string>();
    return r;
}

static bool ua_denied(const HttpRecord& r, const IngestOptions& opts) {
    if (!r.user_agent || opts.ua_denylist.empty()) return false;
    for (const auto& pat : opts.ua_denylist)
        if (r.user_agent->find(pat) != std::string::npos) return true;
    return false;
}

IngestResult ingest_weblog(std::istream& in, const IngestOptions& opts) {
    IngestResult res;
    std::string line;
    std::size_t lineno = 0, parsed_lines = 0;
    std::int64_t prev_ts = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        ++parsed_lines;
        try {
            HttpRecord r = record_from_json(json::parse(line));
            if (ua_denied(r, opts)) {
                ++res.ua_filtered;
                continue;
            }
            if (r.timestamp_ms < prev_ts) res.out_of_order = true;
            prev_ts = r.timestamp_ms;
            res.records.push_back(std::move(r));
        } catch (const std::exception& e) {
            ++res.skipped;
            res.warnings.push_back("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (parsed_lines > 0 &&
        static_cast<double>(res.skipped) >
            opts.max_malformed_fraction * static_cast<double>(parsed_lines)) {
        throw DataError("weblog: " + std::to_string(res.skipped) + " of " +
                        std::to_string(parsed_lines) + " lines malformed");
    }
    return res;
}

IngestResult ingest_weblog_file(const std::string& path, const IngestOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open weblog: " + path);
    return ingest_weblog(in, opts);
}

static std::optional<std::string> har_header(const json& headers, std::string_view name) {
    if (!headers.is_array()) return std::nullopt;
    for (const auto& h : headers) {
        if (!h.contains("name") || !h.contains("value")) continue;
        if (starts_with_ci(h["name"].get<std::string>(), name) &&
            h["name"].get<std::string>().size() == name.size())
            return h["value"].get<std::string>();
    }
    return std::nullopt;
}

IngestResult ingest_har(std::istream& in, const std::string& user_label,
                        const IngestOptions& opts) {
    IngestResult res;
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("HAR parse error at byte " + std::to_string(e.byte) + ": " +
                         e.what());
    }
    if (!doc.contains("log") || !doc["log"].contains("entries"))
        throw ParseError("HAR: missing log.entries");

    struct Pending {
        std::int64_t ts;
        std::size_t order;
        HttpRecord rec;
    };
    std::vector<Pending> pending;
    std::size_t order = 0;
    for (const auto& entry : doc["log"]["entries"]) {
        ++order;
        auto skip = [&](const std::string& why) {
            ++res.skipped;
            res.warnings.push_back("entry " + std::to_string(order) + ": " + why);
        };
        if (!entry.contains("startedDateTime") || !entry.contains("request")) {
            skip("missing startedDateTime or request");
            continue;
        }
        auto ts = parse_iso8601_ms(entry["startedDateTime"].get<std::string>());
        if (!ts) {
            skip("bad startedDateTime");
            continue;
        }
        const auto& req = entry["request"];
        if (!req.contains("url") || !req.contains("method")) {
            skip("request missing url or method");
            continue;
        }
        auto url = parse_url(req["url"].get<std::string>());
        if (!url) {
            skip("unparseable request url");
            continue;
        }
        HttpRecord r;
        r.user_id = user_label;
        r.timestamp_ms = *ts;
        r.method = req["method"].get<std::string>();
        r.scheme = url->scheme == "https" ? Scheme::Https : Scheme::Http;
        r.host = url->host;
        r.path = url->path;
        r.query = url->query;
        if (req.contains("headers")) {
            if (auto ref = har_header(req["headers"], "Referer")) r.referrer = *ref;
            if (auto ua = har_header(req["headers"], "User-Agent")) r.user_agent = *ua;
            if (auto ck = har_header(req["headers"], "Cookie")) {
                for (const std::string& part : split(*ck, ';')) {
                    std::string p = trim(part);
                    if (p.empty()) continue;
                    auto eq = p.find('=');
                    if (eq == std::string::npos)
                        r.cookies_sent.emplace_back(p, "");
                    else
                        r.cookies_sent.emplace_back(p.substr(0, eq), p.substr(eq + 1));
                }
            }
        }
        if (entry.contains("response")) {
            const auto& resp = entry["response"];
            if (resp.contains("status") && resp["status"].is_number()) {
                int st = resp["status"].get<int>();
                if (st > 0) r.status = st;
            }
            if (resp.contains("headers")) {
                if (auto loc = har_header(resp["headers"], "Location")) r.location = *loc;
                for (const auto& h : resp["headers"]) {
                    if (h.contains("name") && h.contains("value") &&
                        starts_with_ci(h["name"].get<std::string>(), "Set-Cookie") &&
                        h["name"].get<std::string>().size() == 10)
                        r.set_cookies.push_back(h["value"].get<std::string>());
                }
            }
            // redirectURL is the HAR-native way to carry Location.
            if (!r.location && resp.contains("redirectURL") &&
                resp["redirectURL"].is_string() &&
                !resp["redirectURL"].get<std::string>().empty())
                r.location = resp["redirectURL"].get<std::string>();
        }
        if (r.host.empty() || r.timestamp_ms <= 0) {
            skip("record invariant violated");
            continue;
        }
        if (ua_denied(r, opts)) {
            ++res.ua_filtered;
            continue;
        }
        pending.push_back({*ts, order, std::move(r)});
    }
    std::stable_sort(pending.begin(), pending.end(),
                     [](const Pending& a, const Pending& b) { return a.ts < b.ts; });
    res.records.reserve(pending.size());
    for (auto& p : pending) res.records.push_back(std::move(p.rec));
    return res;
}

IngestResult ingest_har_file(const std::string& path, const std::string& user_label,
                             const IngestOptions& opts) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open HAR: " + path);
    return ingest_har(in, user_label, opts);
}

void sort_by_time(std::vector<HttpRecord>& records) {
    std::stable_sort(records.begin(), records.end(),
                     [](const HttpRecord& a, const HttpRecord& b) {
                         return a.timestamp_ms < b.timestamp_ms;
                     });
}

std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_user(
    const std::vector<HttpRecord>& records) {
    std::map<std::string, std::vector<std::size_t>> by_user;
    for (std::size_t i = 0; i < records.size(); ++i)
        by_user[records[i].user_id].push_back(i);
    return {by_user.begin(), by_user.end()};
}

}  // namespace conrad
