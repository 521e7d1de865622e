#pragma once

#include <array>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "conrad/detector.hpp"
#include "conrad/entities.hpp"

namespace conrad {

enum class FeatureId {
    EntityName = 0,
    TypeOfEntity,
    ParamName,
    WhereFound,
    StatusCode,
    Browser,
    NoOfParams,
};
inline constexpr std::size_t kFeatureCount = 7;
inline constexpr FeatureId kAllFeatures[] = {
    FeatureId::EntityName, FeatureId::TypeOfEntity, FeatureId::ParamName,
    FeatureId::WhereFound, FeatureId::StatusCode,   FeatureId::Browser,
    FeatureId::NoOfParams};

const char* feature_name(FeatureId f);
std::optional<FeatureId> feature_from_name(std::string_view s);
inline bool feature_is_numeric(FeatureId f) { return f == FeatureId::NoOfParams; }

// Runtime features of one sighting/event, per the cookie-less detector.
struct FeatureVector {
    std::string entity_name;    // recipient entity (or its domain when unknown)
    Category type_of_entity = Category::Other;
    std::string param_name;     // carrier param, or "PATH"/"REFERRER" sentinel
    Carrier where_found = Carrier::Param;
    std::string status_code;    // observed status as a categorical ("NONE" absent)
    std::string browser;        // family from the UA table
    int no_of_params = 0;

    bool operator==(const FeatureVector&) const = default;

    std::string categorical(FeatureId f) const;
    double numeric(FeatureId f) const;
};

enum class ExampleLabel { CSync, IdSharingNonCSync, Other };
inline constexpr std::size_t kLabelCount = 3;
const char* label_name(ExampleLabel l);
std::optional<ExampleLabel> label_from_name(std::string_view s);

struct LabeledExample {
    FeatureVector features;
    ExampleLabel label = ExampleLabel::Other;

    bool operator==(const LabeledExample&) const = default;
};

// Ordered regex table mapping user agents to browser families; first match
// wins, unknown agents fall through to "Other".
class UaFamilyTable {
public:
    static UaFamilyTable defaults();
    static UaFamilyTable from_json(const std::string& text);
    static UaFamilyTable load_file(const std::string& path);

    std::string family(const std::optional<std::string>& user_agent) const;

private:
    std::vector<std::pair<std::string, std::regex>> patterns_;
};

FeatureVector extract_features(const SharingEvent& e, const HttpRecord& record,
                               const EntityCatalog& catalog, const UaFamilyTable& ua);

// Labels one user stream's sightings with the heuristic pipeline's ground
// truth: csync -> CSync, id-sharing -> IdSharingNonCSync, everything else
// (first sightings, filtered shares) -> Other.
ExampleLabel label_for_status(EventStatus s);

std::vector<LabeledExample> examples_from_events(
    const std::vector<SharingEvent>& events, const std::vector<HttpRecord>& records,
    const EntityCatalog& catalog, const UaFamilyTable& ua);

std::string example_to_jsonl(const LabeledExample& e);
LabeledExample example_from_jsonl(const std::string& line);
std::string examples_to_jsonl(const std::vector<LabeledExample>& v);
std::vector<LabeledExample> examples_from_jsonl_text(const std::string& text);

}  // namespace conrad
