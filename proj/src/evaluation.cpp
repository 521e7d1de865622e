#include "conrad/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "conrad/rng.hpp"
#include "conrad/util.hpp"

namespace conrad {

using nlohmann::json;

double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positives) {
    std::size_t p = 0, n = 0;
    for (bool b : positives) (b ? p : n)++;
    if (p == 0 || n == 0) return 0.5;

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    // Sweep score groups; ties advance TP and FP together (diagonal segment).
    double auc = 0.0;
    double tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::size_t dtp = 0, dfp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (positives[order[j]] ? dtp : dfp)++;
            ++j;
        }
        double tp2 = tp + static_cast<double>(dtp);
        double fp2 = fp + static_cast<double>(dfp);
        auc += (fp2 - fp) / static_cast<double>(n) *
               (tp + tp2) / (2.0 * static_cast<double>(p));
        tp = tp2;
        fp = fp2;
        i = j;
    }
    return auc;
}

MetricReport evaluate_predictions(
    const std::vector<ExampleLabel>& truth, const std::vector<ExampleLabel>& predicted,
    const std::vector<std::array<double, kLabelCount>>& scores) {
    MetricReport rep;
    rep.total = truth.size();
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++rep.confusion[static_cast<std::size_t>(truth[i])]
                       [static_cast<std::size_t>(predicted[i])];

    const double n = static_cast<double>(truth.size());
    for (std::size_t c = 0; c < kLabelCount; ++c) {
        ClassMetrics m;
        std::size_t tp = rep.confusion[c][c];
        std::size_t fn = 0, fp = 0;
        for (std::size_t j = 0; j < kLabelCount; ++j) {
            if (j == c) continue;
            fn += rep.confusion[c][j];
            fp += rep.confusion[j][c];
        }
        std::size_t tn = truth.size() - tp - fn - fp;
        m.support = tp + fn;
        m.tpr = (tp + fn) ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        m.fpr = (fp + tn) ? static_cast<double>(fp) / static_cast<double>(fp + tn) : 0.0;
        m.precision =
            (tp + fp) ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        m.recall = m.tpr;
        m.f_measure = (m.precision + m.recall) > 0
                          ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                          : 0.0;
        if (m.support > 0 && m.support < truth.size()) {
            std::vector<double> class_scores(truth.size());
            std::vector<bool> pos(truth.size());
            for (std::size_t i = 0; i < truth.size(); ++i) {
                class_scores[i] = scores[i][c];
                pos[i] = truth[i] == static_cast<ExampleLabel>(c);
            }
            m.auc = roc_auc(class_scores, pos);
        }
        rep.per_class[static_cast<ExampleLabel>(c)] = m;
    }

    ClassMetrics w;
    if (n > 0) {
        for (const auto& [label, m] : rep.per_class) {
            double weight = static_cast<double>(m.support) / n;
            w.tpr += weight * m.tpr;
            w.fpr += weight * m.fpr;
            w.precision += weight * m.precision;
            w.recall += weight * m.recall;
            w.f_measure += weight * m.f_measure;
            w.auc += weight * m.auc;
            w.support += m.support;
        }
        // single-class test sets keep the 0.5 chance-level convention
        if (w.support == 0) w.auc = 0.5;
    }
    rep.weighted = w;
    return rep;
}

namespace {

std::array<std::vector<std::size_t>, kLabelCount> indices_by_class(
    const std::vector<LabeledExample>& examples) {
    std::array<std::vector<std::size_t>, kLabelCount> by_class;
    for (std::size_t i = 0; i < examples.size(); ++i)
        by_class[static_cast<std::size_t>(examples[i].label)].push_back(i);
    return by_class;
}

// Downsample to equal class counts (of the present classes).
std::vector<std::size_t> balance_indices(const std::vector<LabeledExample>& examples,
                                         const std::vector<std::size_t>& pool, Rng& rng) {
    std::array<std::vector<std::size_t>, kLabelCount> by_class;
    for (std::size_t i : pool)
        by_class[static_cast<std::size_t>(examples[i].label)].push_back(i);
    std::size_t min_count = SIZE_MAX;
    for (const auto& v : by_class)
        if (!v.empty()) min_count = std::min(min_count, v.size());
    if (min_count == SIZE_MAX) return pool;
    std::vector<std::size_t> out;
    for (auto& v : by_class) {
        if (v.empty()) continue;
        rng.shuffle(v);
        v.resize(min_count);
        out.insert(out.end(), v.begin(), v.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<LabeledExample> take(const std::vector<LabeledExample>& examples,
                                 const std::vector<std::size_t>& idx) {
    std::vector<LabeledExample> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(examples[i]);
    return out;
}

}  // namespace

MetricReport cross_validate(const std::vector<LabeledExample>& examples,
                            const std::vector<FeatureId>& feature_subset,
                            const EvalConfig& cfg) {
    if (examples.size() < cfg.folds)
        throw ConfigError("cross_validate: fewer examples than folds");
    Rng rng(cfg.seed);

    // Stratified fold assignment: per class, shuffle then deal round-robin.
    std::vector<std::size_t> fold_of(examples.size(), 0);
    auto by_class = indices_by_class(examples);
    std::vector<std::string> warnings;
    for (std::size_t c = 0; c < kLabelCount; ++c) {
        auto& idx = by_class[c];
        if (idx.empty()) continue;
        if (idx.size() < cfg.folds)
            warnings.push_back(std::string("class ") +
                               label_name(static_cast<ExampleLabel>(c)) +
                               " has fewer members than folds; stratification is best-effort");
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i)
            fold_of[idx[i]] = i % cfg.folds;
    }

    std::vector<ExampleLabel> truth(examples.size());
    std::vector<ExampleLabel> predicted(examples.size());
    std::vector<std::array<double, kLabelCount>> scores(examples.size());

    for (std::size_t fold = 0; fold < cfg.folds; ++fold) {
        std::vector<std::size_t> train_idx, test_idx;
        for (std::size_t i = 0; i < examples.size(); ++i)
            (fold_of[i] == fold ? test_idx : train_idx).push_back(i);
        if (test_idx.empty()) continue;
        if (cfg.balance) train_idx = balance_indices(examples, train_idx, rng);
        TreeModel model = train_tree(take(examples, train_idx), feature_subset, cfg.tree);
        for (std::size_t i : test_idx) {
            truth[i] = examples[i].label;
            scores[i] = model.predict(examples[i].features);
            predicted[i] = model.predict_label(examples[i].features);
        }
    }
    MetricReport rep = evaluate_predictions(truth, predicted, scores);
    rep.warnings = std::move(warnings);
    return rep;
}

MetricReport balanced_train_unbalanced_test(const std::vector<LabeledExample>& examples,
                                            const std::vector<FeatureId>& feature_subset,
                                            const EvalConfig& cfg) {
    Rng rng(cfg.seed);
    auto by_class = indices_by_class(examples);
    std::vector<std::size_t> train_idx, test_idx;
    for (auto& idx : by_class) {
        if (idx.empty()) continue;
        rng.shuffle(idx);
        std::size_t n_test = static_cast<std::size_t>(
            std::ceil(static_cast<double>(idx.size()) * cfg.test_fraction));
        n_test = std::min(n_test, idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < n_test ? test_idx : train_idx).push_back(idx[i]);
    }
    std::sort(test_idx.begin(), test_idx.end());
    train_idx = balance_indices(examples, train_idx, rng);
    if (train_idx.empty() || test_idx.empty())
        throw ConfigError("unbalanced-test split produced an empty side");

    TreeModel model = train_tree(take(examples, train_idx), feature_subset, cfg.tree);
    std::vector<ExampleLabel> truth, predicted;
    std::vector<std::array<double, kLabelCount>> scores;
    truth.reserve(test_idx.size());
    for (std::size_t i : test_idx) {
        truth.push_back(examples[i].label);
        scores.push_back(model.predict(examples[i].features));
        predicted.push_back(model.predict_label(examples[i].features));
    }
    return evaluate_predictions(truth, predicted, scores);
}

std::vector<FeatureId> scenario_a_subset(std::string_view name) {
    if (name == "all")
        return {FeatureId::EntityName, FeatureId::TypeOfEntity, FeatureId::ParamName,
                FeatureId::WhereFound, FeatureId::StatusCode,   FeatureId::Browser,
                FeatureId::NoOfParams};
    if (name == "id-less")
        return {FeatureId::NoOfParams, FeatureId::StatusCode, FeatureId::TypeOfEntity,
                FeatureId::Browser, FeatureId::EntityName};
    if (name == "high-importance")
        return {FeatureId::WhereFound, FeatureId::StatusCode, FeatureId::TypeOfEntity,
                FeatureId::Browser, FeatureId::ParamName, FeatureId::EntityName};
    throw ConfigError("unknown scenario-a subset: " + std::string(name));
}

std::vector<FeatureId> scenario_b_subset(std::string_view name) {
    if (name == "all")
        return {FeatureId::NoOfParams, FeatureId::StatusCode, FeatureId::TypeOfEntity,
                FeatureId::EntityName, FeatureId::ParamName};
    if (name == "id-less")
        return {FeatureId::NoOfParams, FeatureId::StatusCode, FeatureId::TypeOfEntity,
                FeatureId::EntityName};
    if (name == "high-importance")
        return {FeatureId::StatusCode, FeatureId::TypeOfEntity, FeatureId::EntityName,
                FeatureId::ParamName};
    throw ConfigError("unknown scenario-b subset: " + std::string(name));
}

std::vector<FeatureId> parse_feature_subset(const std::string& spec, bool scenario_b) {
    if (spec == "all" || spec == "id-less" || spec == "high-importance")
        return scenario_b ? scenario_b_subset(spec) : scenario_a_subset(spec);
    std::vector<FeatureId> out;
    for (const std::string& part : split(spec, ',')) {
        std::string name = trim(part);
        if (name.empty()) continue;
        auto f = feature_from_name(name);
        if (!f) throw ConfigError("unknown feature: " + name);
        out.push_back(*f);
    }
    if (out.empty()) throw ConfigError("empty feature subset: " + spec);
    return out;
}

namespace {

ScenarioReport run_scenario(const std::vector<LabeledExample>& examples,
                            const EvalConfig& cfg, bool scenario_b) {
    ScenarioReport rep;
    rep.scenario = scenario_b ? "b" : "a";
    auto all = scenario_b ? scenario_b_subset("all") : scenario_a_subset("all");
    for (FeatureId f : all) {
        ScenarioRow row;
        row.subset_name = feature_name(f);
        row.features = {f};
        row.report = cross_validate(examples, row.features, cfg);
        rep.rows.push_back(std::move(row));
    }
    for (const char* name : {"id-less", "high-importance", "all"}) {
        ScenarioRow row;
        row.subset_name = name;
        row.features = scenario_b ? scenario_b_subset(name) : scenario_a_subset(name);
        row.report = cross_validate(examples, row.features, cfg);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

}  // namespace

ScenarioReport run_scenario_a(const std::vector<LabeledExample>& examples,
                              const EvalConfig& cfg) {
    std::vector<LabeledExample> binary;
    for (const auto& e : examples)
        if (e.label != ExampleLabel::Other) binary.push_back(e);
    EvalConfig c = cfg;
    c.balance = true;  // the binary protocol trains on balanced folds
    return run_scenario(binary, c, false);
}

ScenarioReport run_scenario_b(const std::vector<LabeledExample>& examples,
                              const EvalConfig& cfg, bool unbalanced_test) {
    ScenarioReport rep = run_scenario(examples, cfg, true);
    if (unbalanced_test) {
        ScenarioRow row;
        row.subset_name = "unbalanced-test";
        row.features = scenario_b_subset("all");
        row.report = balanced_train_unbalanced_test(examples, row.features, cfg);
        rep.rows.push_back(std::move(row));
    }
    return rep;
}

namespace {

json class_metrics_json(const ClassMetrics& m) {
    return json{{"tpr", m.tpr},       {"fpr", m.fpr},
                {"precision", m.precision}, {"recall", m.recall},
                {"f_measure", m.f_measure}, {"auc", m.auc},
                {"support", m.support}};
}

}  // namespace

std::string metric_report_to_json(const MetricReport& r) {
    json j;
    json conf = json::array();
    for (const auto& row : r.confusion) conf.push_back(row);
    j["confusion"] = std::move(conf);
    json per = json::object();
    for (const auto& [label, m] : r.per_class)
        per[label_name(label)] = class_metrics_json(m);
    j["per_class"] = std::move(per);
    j["weighted"] = class_metrics_json(r.weighted);
    j["total"] = r.total;
    j["warnings"] = r.warnings;
    return j.dump(2);
}

std::string scenario_report_to_json(const ScenarioReport& r) {
    json j;
    j["scenario"] = r.scenario;
    json rows = json::array();
    for (const auto& row : r.rows) {
        json jr;
        jr["subset"] = row.subset_name;
        json feats = json::array();
        for (FeatureId f : row.features) feats.push_back(feature_name(f));
        jr["features"] = std::move(feats);
        jr["n_features"] = row.features.size();
        jr["report"] = json::parse(metric_report_to_json(row.report));
        rows.push_back(std::move(jr));
    }
    j["rows"] = std::move(rows);
    return j.dump(2);
}

std::string scenario_report_to_text(const ScenarioReport& r) {
    std::ostringstream out;
    out << "scenario " << r.scenario << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%-18s %2s %7s %7s %7s %7s %7s %7s\n",
                  "subset", "F", "TPR", "FPR", "PR", "RC", "FM", "AUC");
    out << line;
    for (const auto& row : r.rows) {
        const auto& w = row.report.weighted;
        std::snprintf(line, sizeof line,
                      "%-18s %2zu %7.3f %7.3f %7.3f %7.3f %7.3f %7.3f\n",
                      row.subset_name.c_str(), row.features.size(), w.tpr, w.fpr,
                      w.precision, w.recall, w.f_measure, w.auc);
        out << line;
    }
    return out.str();
}

}  // namespace conrad
