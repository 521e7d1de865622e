#include "conrad/util.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace conrad {

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

static int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::string percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            int hi = hex_val(s[i + 1]);
            int lo = hex_val(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out.push_back(static_cast<char>(hi * 16 + lo));
                i += 2;
                continue;
            }
        }
        out.push_back(s[i]);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_query(std::string_view qs) {
    std::vector<std::pair<std::string, std::string>> out;
    if (qs.empty()) return out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= qs.size(); ++i) {
        if (i == qs.size() || qs[i] == '&') {
            std::string_view part = qs.substr(start, i - start);
            if (!part.empty()) {
                auto eq = part.find('=');
                if (eq == std::string_view::npos)
                    out.emplace_back(std::string(part), std::string());
                else
                    out.emplace_back(std::string(part.substr(0, eq)),
                                     std::string(part.substr(eq + 1)));
            }
            start = i + 1;
        }
    }
    return out;
}

std::optional<ParsedUrl> parse_url(std::string_view url) {
    ParsedUrl u;
    std::string_view rest = url;
    auto scheme_end = rest.find("://");
    if (scheme_end != std::string_view::npos) {
        u.scheme = to_lower(rest.substr(0, scheme_end));
        rest = rest.substr(scheme_end + 3);
    } else {
        u.scheme = "http";
    }
    if (rest.empty()) return std::nullopt;

    auto frag = rest.find('#');
    if (frag != std::string_view::npos) rest = rest.substr(0, frag);

    std::size_t host_end = rest.find_first_of("/?");
    std::string_view authority = rest.substr(0, host_end);
    // strip userinfo and port
    auto at = authority.rfind('@');
    if (at != std::string_view::npos) authority = authority.substr(at + 1);
    if (!authority.empty() && authority.front() == '[') {
        auto close = authority.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        u.host = to_lower(authority.substr(0, close + 1));
    } else {
        auto colon = authority.find(':');
        if (colon != std::string_view::npos) authority = authority.substr(0, colon);
        u.host = to_lower(authority);
    }
    if (u.host.empty()) return std::nullopt;

    if (host_end == std::string_view::npos) {
        u.path = "/";
        return u;
    }
    rest = rest.substr(host_end);
    auto qpos = rest.find('?');
    if (qpos == std::string_view::npos) {
        u.path = rest.empty() ? "/" : std::string(rest);
    } else {
        u.path = qpos == 0 ? "/" : std::string(rest.substr(0, qpos));
        u.query = parse_query(rest.substr(qpos + 1));
    }
    if (u.path.empty() || u.path[0] != '/') u.path.insert(u.path.begin(), '/');
    return u;
}

std::int64_t civil_to_epoch_ms(int year, int month, int day,
                               int hour, int minute, int second, int ms) {
    // Howard Hinnant's days_from_civil.
    year -= month <= 2;
    const int era = (year >= 0 ? year : year - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(year - era * 400);
    const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    const std::int64_t days = static_cast<std::int64_t>(era) * 146097 +
                              static_cast<std::int64_t>(doe) - 719468;
    return ((days * 24 + hour) * 60 + minute) * 60000 + second * 1000 + ms;
}

std::optional<std::int64_t> parse_iso8601_ms(std::string_view s) {
    // YYYY-MM-DD['T' HH:MM:SS[.fff]] [Z | +hh:mm | -hh:mm]
    auto num = [&](std::size_t pos, std::size_t len, int& out) -> bool {
        if (pos + len > s.size()) return false;
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
            v = v * 10 + (s[i] - '0');
        }
        out = v;
        return true;
    };
    int y, mo, d, h = 0, mi = 0, sec = 0, ms = 0;
    if (!num(0, 4, y) || s.size() < 10 || s[4] != '-' || !num(5, 2, mo) ||
        s[7] != '-' || !num(8, 2, d))
        return std::nullopt;
    std::size_t pos = 10;
    if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
        if (!num(pos + 1, 2, h) || pos + 3 >= s.size() || s[pos + 3] != ':' ||
            !num(pos + 4, 2, mi) || pos + 6 >= s.size() || s[pos + 6] != ':' ||
            !num(pos + 7, 2, sec))
            return std::nullopt;
        pos += 9;
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            int mult = 100;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                if (mult > 0) ms += (s[pos] - '0') * mult;
                mult /= 10;
                ++pos;
            }
        }
    }
    std::int64_t base = civil_to_epoch_ms(y, mo, d, h, mi, sec, ms);
    if (pos < s.size()) {
        char c = s[pos];
        if (c == 'Z') return base;
        if (c == '+' || c == '-') {
            int oh, om = 0;
            if (!num(pos + 1, 2, oh)) return std::nullopt;
            std::size_t mp = pos + 3;
            if (mp < s.size() && s[mp] == ':') ++mp;
            if (mp < s.size()) {
                if (!num(mp, 2, om)) return std::nullopt;
            }
            std::int64_t off = (oh * 60 + om) * 60000LL;
            return c == '+' ? base - off : base + off;
        }
        return std::nullopt;
    }
    return base;
}

static std::optional<int> month_from_name(std::string_view m) {
    static const std::array<const char*, 12> names = {"jan", "feb", "mar", "apr",
                                                      "may", "jun", "jul", "aug",
                                                      "sep", "oct", "nov", "dec"};
    std::string l = to_lower(m.substr(0, 3));
    for (int i = 0; i < 12; ++i)
        if (l == names[static_cast<std::size_t>(i)]) return i + 1;
    return std::nullopt;
}

std::optional<std::int64_t> parse_http_date_ms(std::string_view s) {
    // Tokenize on spaces, commas and dashes; accepts the three classic forms:
    //   Wed, 01 Apr 2015 15:03:42 GMT
    //   Wednesday, 01-Apr-15 15:03:42 GMT
    //   Wed Apr  1 15:03:42 2015
    std::vector<std::string> tok;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == ',' || c == '-') {
            if (!cur.empty()) tok.push_back(cur), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tok.push_back(cur);
    if (tok.size() < 4) return std::nullopt;

    int day = 0, year = 0, mon = 0;
    std::string timestr;
    auto as_int = [](const std::string& t, int& out) {
        auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
        return ec == std::errc() && p == t.data() + t.size();
    };
    // Skip leading weekday token if non-numeric.
    std::size_t i = 0;
    if (!std::isdigit(static_cast<unsigned char>(tok[0][0]))) ++i;
    if (i + 3 > tok.size()) return std::nullopt;

    if (std::isdigit(static_cast<unsigned char>(tok[i][0]))) {
        // day month year time
        if (!as_int(tok[i], day)) return std::nullopt;
        auto m = month_from_name(tok[i + 1]);
        if (!m) return std::nullopt;
        mon = *m;
        if (i + 3 >= tok.size() || !as_int(tok[i + 2], year)) return std::nullopt;
        timestr = tok[i + 3];
    } else {
        // asctime: month day time year
        auto m = month_from_name(tok[i]);
        if (!m || i + 3 >= tok.size()) return std::nullopt;
        mon = *m;
        if (!as_int(tok[i + 1], day)) return std::nullopt;
        timestr = tok[i + 2];
        if (!as_int(tok[i + 3], year)) return std::nullopt;
    }
    if (year < 100) year += year < 70 ? 2000 : 1900;

    auto parts = split(timestr, ':');
    if (parts.size() != 3) return std::nullopt;
    int h, mi, sec;
    if (!as_int(parts[0], h) || !as_int(parts[1], mi) || !as_int(parts[2], sec))
        return std::nullopt;
    if (mon < 1 || mon > 12 || day < 1 || day > 31) return std::nullopt;
    return civil_to_epoch_ms(year, mon, day, h, mi, sec, 0);
}

bool is_ipv4_literal(std::string_view host) {
    int dots = 0, digits = 0, val = 0;
    for (char c : host) {
        if (c == '.') {
            if (digits == 0 || val > 255) return false;
            ++dots;
            digits = 0;
            val = 0;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            ++digits;
            if (digits > 3) return false;
            val = val * 10 + (c - '0');
        } else {
            return false;
        }
    }
    return dots == 3 && digits > 0 && val <= 255;
}

bool is_ip_literal(std::string_view host) {
    if (host.empty()) return false;
    if (host.front() == '[' || host.find(':') != std::string_view::npos) return true;
    return is_ipv4_literal(host);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace conrad
