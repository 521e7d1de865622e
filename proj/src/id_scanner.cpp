#include "conrad/id_scanner.hpp"

#include <cctype>
#include <set>

#include "conrad/util.hpp"

namespace conrad {

const char* carrier_name(Carrier c) {
    switch (c) {
        case Carrier::Param: return "param";
        case Carrier::Path: return "path";
        case Carrier::Referrer: return "referrer";
    }
    return "param";
}

std::optional<Carrier> carrier_from_name(std::string_view s) {
    if (s == "param") return Carrier::Param;
    if (s == "path") return Carrier::Path;
    if (s == "referrer") return Carrier::Referrer;
    return std::nullopt;
}

void IdPredicate::load_denylist(const std::string& path) {
    for (const std::string& raw : split(read_file(path), '\n')) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        denylist_.insert(line);
    }
}

bool IdPredicate::operator()(std::string_view s) const {
    if (s.size() <= 10) return false;
    if (mode_ == Mode::StrictPaper) return true;

    bool has_digit = false, has_lower = false, has_upper = false;
    for (char c : s) {
        unsigned char u = static_cast<unsigned char>(c);
        if (std::isdigit(u)) {
            has_digit = true;
        } else if (std::islower(u)) {
            has_lower = true;
        } else if (std::isupper(u)) {
            has_upper = true;
        } else if (c != '_' && c != '-') {
            return false;
        }
    }
    if (!has_digit && !(has_lower && has_upper)) return false;
    if (!denylist_.empty() && denylist_.count(std::string(s))) return false;
    return true;
}

std::vector<std::string> split_value(std::string_view raw) {
    static constexpr std::string_view kDelims = ":&;|,=";
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= raw.size(); ++i) {
        if (i == raw.size() || kDelims.find(raw[i]) != std::string_view::npos) {
            if (i > start) out.emplace_back(raw.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

namespace {

struct Collector {
    const IdPredicate& pred;
    std::vector<IdSighting>& out;
    std::set<std::pair<std::string, Carrier>> seen;

    void emit(std::string token, Carrier carrier,
              std::optional<std::string> param_name) {
        if (!pred(token)) return;
        if (!seen.insert({token, carrier}).second) return;
        IdSighting s;
        s.token = std::move(token);
        s.carrier = carrier;
        s.param_name = std::move(param_name);
        out.push_back(std::move(s));
    }

    // A value may carry several candidates glued by delimiters; a plain
    // token is returned unchanged by split_value.
    void scan_value(std::string_view value, Carrier carrier,
                    const std::optional<std::string>& param_name) {
        for (auto& frag : split_value(value)) emit(std::move(frag), carrier, param_name);
    }

    void scan_path_segments(std::string_view path, Carrier carrier) {
        for (const std::string& seg : split(path, '/')) {
            if (seg.empty()) continue;
            scan_value(seg, carrier, std::nullopt);
        }
    }
};

}  // namespace

std::vector<IdSighting> scan_record(const HttpRecord& r, std::size_t record_ref,
                                    const IdPredicate& pred, const PublicSuffixList& psl,
                                    const ScanOptions& opts) {
    std::vector<IdSighting> out;
    Collector col{pred, out, {}};

    if (opts.scan_params) {
        for (const auto& [name, value] : r.query)
            col.scan_value(percent_decode(value), Carrier::Param, name);
    }
    if (opts.scan_path) {
        col.scan_path_segments(percent_decode(r.path), Carrier::Path);
    }

    std::optional<RegistrableDomain> sender_hint;
    if (r.referrer) {
        if (auto ref = parse_url(*r.referrer)) {
            if (auto rd = psl.registrable_domain(ref->host)) sender_hint = *rd;
            if (opts.scan_referrer) {
                for (const auto& [name, value] : ref->query)
                    col.scan_value(percent_decode(value), Carrier::Referrer, name);
                col.scan_path_segments(percent_decode(ref->path), Carrier::Referrer);
            }
        }
        // unparseable referrer: skip the referrer scan, keep the rest
    }

    auto receiver = psl.registrable_domain(r.host);
    RegistrableDomain receiver_rd = receiver ? *receiver : RegistrableDomain{r.host};
    for (auto& s : out) {
        s.record_ref = record_ref;
        s.receiver_domain = receiver_rd;
        s.sender_hint = sender_hint;
    }
    return out;
}

}  // namespace conrad
