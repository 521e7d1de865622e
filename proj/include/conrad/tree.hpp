#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "conrad/features.hpp"

namespace conrad {

struct TreeConfig {
    int max_depth = 12;
    std::size_t min_leaf = 5;   // nodes smaller than this become leaves
    double min_gain = 1e-6;     // splits below this gain are rejected
    double laplace = 1.0;       // leaf probability smoothing

    bool operator==(const TreeConfig&) const = default;
};

// Shannon entropy (log2) of a class-count histogram.
double shannon_entropy(const std::vector<std::size_t>& counts);

// Information gain of splitting on one feature: multiway over observed
// values for categoricals, best binary threshold for NoOfParams.
double feature_gain(const std::vector<LabeledExample>& examples, FeatureId f);

// Top-down information-gain tree with multiway categorical splits and an
// implicit fallback branch: unseen values stop at the split node and read
// its own class distribution.
class TreeModel {
public:
    std::array<double, kLabelCount> predict(const FeatureVector& v) const;
    ExampleLabel predict_label(const FeatureVector& v) const;

    bool trained() const { return !nodes_.empty(); }
    int depth() const;
    std::size_t node_count() const { return nodes_.size(); }
    double root_gain() const;
    FeatureId root_feature() const;
    bool root_is_leaf() const;
    const TreeConfig& config() const { return config_; }
    const std::vector<FeatureId>& features() const { return features_; }

    std::string to_json() const;
    static TreeModel from_json(const std::string& text);

private:
    struct Node {
        bool leaf = true;
        std::array<double, kLabelCount> probs{};  // Laplace-smoothed
        FeatureId feature = FeatureId::EntityName;
        bool numeric = false;
        double threshold = 0.0;                   // numeric: <= goes left
        std::map<std::string, int> branches;      // categorical children
        int left = -1, right = -1;                // numeric children
        double gain = 0.0;
    };
    std::vector<Node> nodes_;  // nodes_[0] is the root
    std::vector<FeatureId> features_;
    TreeConfig config_;

    friend TreeModel train_tree(const std::vector<LabeledExample>&,
                                const std::vector<FeatureId>&, const TreeConfig&);
};

// Greedy induction. Throws ConfigError on an empty example set; a
// single-class input yields a one-leaf model.
TreeModel train_tree(const std::vector<LabeledExample>& examples,
                     const std::vector<FeatureId>& feature_subset,
                     const TreeConfig& cfg = {});

}  // namespace conrad
