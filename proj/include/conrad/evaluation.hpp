#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "conrad/tree.hpp"

namespace conrad {

struct ClassMetrics {
    double tpr = 0, fpr = 0, precision = 0, recall = 0, f_measure = 0, auc = 0.5;
    std::size_t support = 0;
};

struct MetricReport {
    // confusion[actual][predicted], indexed by ExampleLabel.
    std::array<std::array<std::size_t, kLabelCount>, kLabelCount> confusion{};
    std::map<ExampleLabel, ClassMetrics> per_class;
    ClassMetrics weighted;  // support-weighted over test classes
    std::size_t total = 0;
    std::vector<std::string> warnings;
};

// ROC AUC by trapezoidal integration with diagonal tie segments; equal to
// the Mann-Whitney statistic with 0.5 credit for ties.
double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positives);

// Builds the full report from per-example truths, argmax predictions and
// per-class scores (scores[i][c] = predicted probability of class c).
MetricReport evaluate_predictions(
    const std::vector<ExampleLabel>& truth, const std::vector<ExampleLabel>& predicted,
    const std::vector<std::array<double, kLabelCount>>& scores);

struct EvalConfig {
    std::size_t folds = 10;
    bool balance = false;        // downsample training folds to equal classes
    std::uint64_t seed = 1;
    TreeConfig tree;
    double test_fraction = 0.3;  // for the balanced-train/unbalanced-test split
};

// Stratified k-fold cross-validation with pooled predictions. Training
// folds are optionally class-balanced by downsampling; test folds are
// never touched.
MetricReport cross_validate(const std::vector<LabeledExample>& examples,
                            const std::vector<FeatureId>& feature_subset,
                            const EvalConfig& cfg);

// Balanced-train / unbalanced-test protocol: a stratified holdout split
// keeps natural class ratios in the test set, training examples are
// downsampled to equal class counts.
MetricReport balanced_train_unbalanced_test(const std::vector<LabeledExample>& examples,
                                            const std::vector<FeatureId>& feature_subset,
                                            const EvalConfig& cfg);

struct ScenarioRow {
    std::string subset_name;
    std::vector<FeatureId> features;
    MetricReport report;
};

struct ScenarioReport {
    std::string scenario;
    std::vector<ScenarioRow> rows;
};

// Named feature subsets. Scenario A (binary, given id-sharing entries)
// evaluates all seven runtime features; the id-less subset drops ParamName
// and WhereFound, the high-importance subset drops NoOfParams.
std::vector<FeatureId> scenario_a_subset(std::string_view name);  // all|id-less|high-importance
std::vector<FeatureId> scenario_b_subset(std::string_view name);

// Parses "all", "id-less", "high-importance" or a comma list of feature
// names against the given resolver.
std::vector<FeatureId> parse_feature_subset(const std::string& spec, bool scenario_b);

// Binary task: CSync vs id-sharing-non-CSync, 10-fold CV per subset row.
ScenarioReport run_scenario_a(const std::vector<LabeledExample>& examples,
                              const EvalConfig& cfg);

// 3-class task over all sightings. With unbalanced_test=true the ALL row is
// additionally evaluated under the balanced-train/unbalanced-test protocol.
ScenarioReport run_scenario_b(const std::vector<LabeledExample>& examples,
                              const EvalConfig& cfg, bool unbalanced_test = false);

std::string metric_report_to_json(const MetricReport& r);
std::string scenario_report_to_json(const ScenarioReport& r);
// Plain-text table, one row per subset: TPR FPR PR RC FM AUC.
std::string scenario_report_to_text(const ScenarioReport& r);

}  // namespace conrad
