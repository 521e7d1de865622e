#include "conrad/features.hpp"

#include <nlohmann/json.hpp>

#include "conrad/util.hpp"

namespace conrad {

using nlohmann::json;

const char* feature_name(FeatureId f) {
    switch (f) {
        case FeatureId::EntityName: return "EntityName";
        case FeatureId::TypeOfEntity: return "TypeOfEntity";
        case FeatureId::ParamName: return "ParamName";
        case FeatureId::WhereFound: return "WhereFound";
        case FeatureId::StatusCode: return "StatusCode";
        case FeatureId::Browser: return "Browser";
        case FeatureId::NoOfParams: return "NoOfParams";
    }
    return "EntityName";
}

std::optional<FeatureId> feature_from_name(std::string_view s) {
    for (FeatureId f : kAllFeatures)
        if (s == feature_name(f)) return f;
    return std::nullopt;
}

const char* label_name(ExampleLabel l) {
    switch (l) {
        case ExampleLabel::CSync: return "csync";
        case ExampleLabel::IdSharingNonCSync: return "id-sharing-non-csync";
        case ExampleLabel::Other: return "other";
    }
    return "other";
}

std::optional<ExampleLabel> label_from_name(std::string_view s) {
    if (s == "csync") return ExampleLabel::CSync;
    if (s == "id-sharing-non-csync") return ExampleLabel::IdSharingNonCSync;
    if (s == "other") return ExampleLabel::Other;
    return std::nullopt;
}

std::string FeatureVector::categorical(FeatureId f) const {
    switch (f) {
        case FeatureId::EntityName: return entity_name;
        case FeatureId::TypeOfEntity: return category_name(type_of_entity);
        case FeatureId::ParamName: return param_name;
        case FeatureId::WhereFound: return carrier_name(where_found);
        case FeatureId::StatusCode: return status_code;
        case FeatureId::Browser: return browser;
        case FeatureId::NoOfParams: return std::to_string(no_of_params);
    }
    return {};
}

double FeatureVector::numeric(FeatureId f) const {
    return f == FeatureId::NoOfParams ? static_cast<double>(no_of_params) : 0.0;
}

UaFamilyTable UaFamilyTable::defaults() {
    static const char* kDefault = R"({
      "families": [
        {"family": "Edge",    "pattern": "Edge?/"},
        {"family": "Opera",   "pattern": "(OPR/|Opera)"},
        {"family": "IE",      "pattern": "(MSIE |Trident/)"},
        {"family": "Firefox", "pattern": "Firefox/"},
        {"family": "Chrome",  "pattern": "(Chrome/|CriOS/)"},
        {"family": "Safari",  "pattern": "Safari/"}
      ]
    })";
    return from_json(kDefault);
}

UaFamilyTable UaFamilyTable::from_json(const std::string& text) {
    UaFamilyTable t;
    json root = json::parse(text);
    for (const auto& f : root.at("families")) {
        t.patterns_.emplace_back(f.at("family").get<std::string>(),
                                 std::regex(f.at("pattern").get<std::string>()));
    }
    return t;
}

UaFamilyTable UaFamilyTable::load_file(const std::string& path) {
    return from_json(read_file(path));
}

std::string UaFamilyTable::family(const std::optional<std::string>& user_agent) const {
    if (!user_agent) return "Other";
    for (const auto& [name, re] : patterns_)
        if (std::regex_search(*user_agent, re)) return name;
    return "Other";
}

FeatureVector extract_features(const SharingEvent& e, const HttpRecord& record,
                               const EntityCatalog& catalog, const UaFamilyTable& ua) {
    FeatureVector v;
    v.entity_name = catalog.entity_name(e.receiver);
    v.type_of_entity = catalog.categorize(e.receiver);
    if (e.param_name) {
        v.param_name = *e.param_name;
    } else {
        v.param_name = e.carrier == Carrier::Path ? "PATH" : "REFERRER";
    }
    v.where_found = e.carrier;
    v.status_code = record.status ? std::to_string(*record.status) : "NONE";
    v.browser = ua.family(record.user_agent);
    v.no_of_params = static_cast<int>(record.query.size());
    return v;
}

ExampleLabel label_for_status(EventStatus s) {
    switch (s) {
        case EventStatus::CSync: return ExampleLabel::CSync;
        case EventStatus::IdSharing: return ExampleLabel::IdSharingNonCSync;
        case EventStatus::FirstSeen:
        case EventStatus::FilteredSameProvider: return ExampleLabel::Other;
    }
    return ExampleLabel::Other;
}

std::vector<LabeledExample> examples_from_events(
    const std::vector<SharingEvent>& events, const std::vector<HttpRecord>& records,
    const EntityCatalog& catalog, const UaFamilyTable& ua) {
    std::vector<LabeledExample> out;
    out.reserve(events.size());
    for (const auto& e : events) {
        LabeledExample ex;
        ex.features = extract_features(e, records[e.record_ref], catalog, ua);
        ex.label = label_for_status(e.status);
        out.push_back(std::move(ex));
    }
    return out;
}

std::string example_to_jsonl(const LabeledExample& e) {
    json j;
    j["features"] = {{"entity", e.features.entity_name},
                     {"type", category_name(e.features.type_of_entity)},
                     {"param", e.features.param_name},
                     {"where", carrier_name(e.features.where_found)},
                     {"status", e.features.status_code},
                     {"browser", e.features.browser},
                     {"n_params", e.features.no_of_params}};
    j["label"] = label_name(e.label);
    return j.dump();
}

LabeledExample example_from_jsonl(const std::string& line) {
    json j = json::parse(line);
    LabeledExample e;
    const auto& f = j.at("features");
    e.features.entity_name = f.at("entity").get<std::string>();
    auto cat = category_from_name(f.at("type").get<std::string>());
    if (!cat) throw ParseError("bad entity type");
    e.features.type_of_entity = *cat;
    e.features.param_name = f.at("param").get<std::string>();
    auto w = carrier_from_name(f.at("where").get<std::string>());
    if (!w) throw ParseError("bad where");
    e.features.where_found = *w;
    e.features.status_code = f.at("status").get<std::string>();
    e.features.browser = f.at("browser").get<std::string>();
    e.features.no_of_params = f.at("n_params").get<int>();
    auto l = label_from_name(j.at("label").get<std::string>());
    if (!l) throw ParseError("bad label");
    e.label = *l;
    return e;
}

std::string examples_to_jsonl(const std::vector<LabeledExample>& v) {
    std::string out;
    for (const auto& e : v) {
        out += example_to_jsonl(e);
        out += '\n';
    }
    return out;
}

std::vector<LabeledExample> examples_from_jsonl_text(const std::string& text) {
    std::vector<LabeledExample> out;
    for (const std::string& line : split(text, '\n')) {
        if (trim(line).empty()) continue;
        out.push_back(example_from_jsonl(line));
    }
    return out;
}

}  // namespace conrad
