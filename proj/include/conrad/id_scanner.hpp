#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "conrad/public_suffix.hpp"
#include "conrad/traffic.hpp"

namespace conrad {

enum class Carrier { Param, Path, Referrer };

const char* carrier_name(Carrier c);
std::optional<Carrier> carrier_from_name(std::string_view s);

// Where an ID-looking string was spotted in one record.
struct IdSighting {
    std::string token;
    Carrier carrier = Carrier::Param;
    std::optional<std::string> param_name;  // set for Param and referrer-query hits
    std::size_t record_ref = 0;
    RegistrableDomain receiver_domain;
    std::optional<RegistrableDomain> sender_hint;  // referrer host, when parseable
};

// The ID-looking gate. "extended" adds charset, digit/mixed-case and denylist
// constraints on top of the bare length rule; "strict-paper" is length-only.
class IdPredicate {
public:
    enum class Mode { Extended, StrictPaper };

    explicit IdPredicate(Mode mode = Mode::Extended) : mode_(mode) {}

    void load_denylist(const std::string& path);
    void add_denied(std::string token) { denylist_.insert(std::move(token)); }

    bool operator()(std::string_view s) const;

    Mode mode() const { return mode_; }
    void set_mode(Mode m) { mode_ = m; }
    std::size_t denylist_size() const { return denylist_.size(); }

private:
    Mode mode_;
    std::unordered_set<std::string> denylist_;
};

// Splits a value string on the common-delimiter set {':','&',';','|',',','='},
// dropping empty fragments and preserving order. Shared with the cookie
// ledger, which applies the same rule to cookie values.
std::vector<std::string> split_value(std::string_view raw);

struct ScanOptions {
    bool scan_params = true;
    bool scan_path = true;
    bool scan_referrer = true;
};

// Extracts all ID-looking tokens from a record: query values (decoded once),
// path segments, and the referrer URL's query and path. Deduplicated per
// (token, carrier) within the record.
std::vector<IdSighting> scan_record(const HttpRecord& r, std::size_t record_ref,
                                    const IdPredicate& pred, const PublicSuffixList& psl,
                                    const ScanOptions& opts = {});

}  // namespace conrad
