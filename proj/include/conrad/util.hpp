#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace conrad {

// Thrown on unrecoverable input problems (malformed JSON, bad config files).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when data-quality thresholds are exceeded (e.g. too many bad lines).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

std::string to_lower(std::string_view s);
bool starts_with_ci(std::string_view s, std::string_view prefix);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Decodes %XX sequences exactly once; invalid escapes are kept verbatim.
// '+' is left alone (identifiers never contain spaces, and decoding '+'
// would corrupt base64-style tokens).
std::string percent_decode(std::string_view s);

struct ParsedUrl {
    std::string scheme;   // lowercase; "http" assumed when absent
    std::string host;     // lowercase, port stripped
    std::string path;     // always starts with '/'
    std::vector<std::pair<std::string, std::string>> query;  // raw, in order
};

// Accepts absolute URLs and scheme-less forms like "example.com/a?b=c".
// Fragments are dropped. Returns nullopt when no host can be extracted.
std::optional<ParsedUrl> parse_url(std::string_view url);

// Splits a raw query string ("a=1&b=2&b=3") preserving order and duplicates.
std::vector<std::pair<std::string, std::string>> parse_query(std::string_view qs);

// ISO 8601 timestamp ("2015-03-19T01:09:47.123+02:00" or trailing 'Z')
// to epoch milliseconds. Returns nullopt on malformed input.
std::optional<std::int64_t> parse_iso8601_ms(std::string_view s);

// HTTP cookie/header date (RFC1123, RFC850 or asctime) to epoch ms.
std::optional<std::int64_t> parse_http_date_ms(std::string_view s);

// Days-from-civil based conversion, independent of the local timezone.
std::int64_t civil_to_epoch_ms(int year, int month, int day,
                               int hour, int minute, int second, int ms);

bool is_ipv4_literal(std::string_view host);
bool is_ip_literal(std::string_view host);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace conrad
