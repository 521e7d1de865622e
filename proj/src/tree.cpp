#include "conrad/tree.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "conrad/util.hpp"

namespace conrad {

using nlohmann::json;

double shannon_entropy(const std::vector<std::size_t>& counts) {
    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    if (total == 0) return 0.0;
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

namespace {

struct Dataset {
    // Per-feature categorical codes (numeric features keep raw values).
    std::vector<std::array<int, kFeatureCount>> codes;
    std::vector<double> numeric;  // NoOfParams value per example
    std::vector<int> labels;
    std::array<std::vector<std::string>, kFeatureCount> dictionaries;

    static Dataset build(const std::vector<LabeledExample>& examples) {
        Dataset ds;
        std::array<std::unordered_map<std::string, int>, kFeatureCount> interner;
        ds.codes.resize(examples.size());
        ds.numeric.resize(examples.size());
        ds.labels.resize(examples.size());
        for (std::size_t i = 0; i < examples.size(); ++i) {
            const auto& ex = examples[i];
            ds.labels[i] = static_cast<int>(ex.label);
            ds.numeric[i] = ex.features.numeric(FeatureId::NoOfParams);
            for (FeatureId f : kAllFeatures) {
                auto fi = static_cast<std::size_t>(f);
                if (feature_is_numeric(f)) {
                    ds.codes[i][fi] = -1;
                    continue;
                }
                std::string v = ex.features.categorical(f);
                auto [it, inserted] =
                    interner[fi].emplace(std::move(v), static_cast<int>(ds.dictionaries[fi].size()));
                if (inserted) ds.dictionaries[fi].push_back(it->first);
                ds.codes[i][fi] = it->second;
            }
        }
        return ds;
    }
};

std::array<std::size_t, kLabelCount> label_counts(const Dataset& ds,
                                                  const std::vector<std::size_t>& idx) {
    std::array<std::size_t, kLabelCount> c{};
    for (std::size_t i : idx) ++c[static_cast<std::size_t>(ds.labels[i])];
    return c;
}

double entropy_of(const std::array<std::size_t, kLabelCount>& counts, std::size_t total) {
    if (total == 0) return 0.0;
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

struct SplitChoice {
    double gain = -1.0;
    FeatureId feature = FeatureId::EntityName;
    bool numeric = false;
    double threshold = 0.0;
    bool valid = false;
};

// Gain of the multiway categorical split; invalid when it produces < 2
// non-empty children.
std::pair<double, bool> categorical_gain(const Dataset& ds,
                                         const std::vector<std::size_t>& idx,
                                         double parent_entropy, FeatureId f) {
    auto fi = static_cast<std::size_t>(f);
    std::unordered_map<int, std::array<std::size_t, kLabelCount>> groups;
    for (std::size_t i : idx) ++groups[ds.codes[i][fi]][static_cast<std::size_t>(ds.labels[i])];
    if (groups.size() < 2) return {0.0, false};
    double remainder = 0.0;
    const double n = static_cast<double>(idx.size());
    for (const auto& [code, counts] : groups) {
        std::size_t sub = 0;
        for (std::size_t c : counts) sub += c;
        remainder += (static_cast<double>(sub) / n) * entropy_of(counts, sub);
    }
    return {parent_entropy - remainder, true};
}

// Best binary threshold for the numeric feature; invalid when all values
// are equal.
std::tuple<double, double, bool> numeric_gain(const Dataset& ds,
                                              const std::vector<std::size_t>& idx,
                                              double parent_entropy) {
    std::vector<std::pair<double, int>> vals;
    vals.reserve(idx.size());
    for (std::size_t i : idx) vals.emplace_back(ds.numeric[i], ds.labels[i]);
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) return {0.0, 0.0, false};

    std::array<std::size_t, kLabelCount> left{}, right{};
    for (const auto& [v, l] : vals) ++right[static_cast<std::size_t>(l)];
    const double n = static_cast<double>(vals.size());
    double best_gain = -1.0, best_threshold = 0.0;
    std::size_t nl = 0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        auto l = static_cast<std::size_t>(vals[i].second);
        ++left[l];
        --right[l];
        ++nl;
        if (vals[i].first == vals[i + 1].first) continue;
        double threshold = (vals[i].first + vals[i + 1].first) / 2.0;
        double remainder =
            (static_cast<double>(nl) / n) * entropy_of(left, nl) +
            ((n - static_cast<double>(nl)) / n) * entropy_of(right, vals.size() - nl);
        double gain = parent_entropy - remainder;
        if (gain > best_gain) {
            best_gain = gain;
            best_threshold = threshold;
        }
    }
    return {best_gain, best_threshold, true};
}

}  // namespace

double feature_gain(const std::vector<LabeledExample>& examples, FeatureId f) {
    Dataset ds = Dataset::build(examples);
    std::vector<std::size_t> idx(examples.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto counts = label_counts(ds, idx);
    double parent = entropy_of(counts, idx.size());
    if (feature_is_numeric(f)) {
        auto [gain, threshold, valid] = numeric_gain(ds, idx, parent);
        (void)threshold;
        return valid ? gain : 0.0;
    }
    auto [gain, valid] = categorical_gain(ds, idx, parent, f);
    return valid ? gain : 0.0;
}

TreeModel train_tree(const std::vector<LabeledExample>& examples,
                     const std::vector<FeatureId>& feature_subset,
                     const TreeConfig& cfg) {
    if (examples.empty()) throw ConfigError("train_tree: empty example set");
    Dataset ds = Dataset::build(examples);

    TreeModel model;
    model.config_ = cfg;
    model.features_ = feature_subset;

    struct Frame {
        std::vector<std::size_t> idx;
        int depth;
        std::uint32_t used_categoricals;  // bitmask over FeatureId
        int node_index;
    };

    auto make_probs = [&](const std::array<std::size_t, kLabelCount>& counts,
                          std::size_t total) {
        std::array<double, kLabelCount> p{};
        double denom = static_cast<double>(total) + cfg.laplace * kLabelCount;
        for (std::size_t c = 0; c < kLabelCount; ++c)
            p[c] = (static_cast<double>(counts[c]) + cfg.laplace) / denom;
        return p;
    };

    std::vector<Frame> stack;
    model.nodes_.emplace_back();
    {
        std::vector<std::size_t> all(examples.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        stack.push_back({std::move(all), 0, 0u, 0});
    }

    while (!stack.empty()) {
        Frame frame = std::move(stack.back());
        stack.pop_back();
        auto counts = label_counts(ds, frame.idx);
        double parent_entropy = entropy_of(counts, frame.idx.size());
        TreeModel::Node& node = model.nodes_[static_cast<std::size_t>(frame.node_index)];
        node.probs = make_probs(counts, frame.idx.size());

        bool pure = false;
        for (std::size_t c = 0; c < kLabelCount; ++c)
            if (counts[c] == frame.idx.size()) pure = true;
        if (pure || frame.depth >= cfg.max_depth || frame.idx.size() < cfg.min_leaf)
            continue;  // stays a leaf

        SplitChoice best;
        for (FeatureId f : features_) {
            auto fi = static_cast<std::size_t>(f);
            if (feature_is_numeric(f)) {
                auto [gain, threshold, valid] = numeric_gain(ds, frame.idx, parent_entropy);
                if (valid && gain > best.gain) {
                    best = {gain, f, true, threshold, true};
                }
            } else {
                if (frame.used_categoricals & (1u << fi)) continue;
                auto [gain, valid] = categorical_gain(ds, frame.idx, parent_entropy, f);
                if (valid && gain > best.gain) {
                    best = {gain, f, false, 0.0, true};
                }
            }
        }
        if (!best.valid || best.gain < cfg.min_gain) continue;

        // materialize the split
        auto fi = static_cast<std::size_t>(best.feature);
        if (best.numeric) {
            std::vector<std::size_t> left, right;
            for (std::size_t i : frame.idx)
                (ds.numeric[i] <= best.threshold ? left : right).push_back(i);
            if (left.empty() || right.empty()) continue;
            int li = static_cast<int>(model.nodes_.size());
            model.nodes_.emplace_back();
            int ri = static_cast<int>(model.nodes_.size());
            model.nodes_.emplace_back();
            TreeModel::Node& n = model.nodes_[static_cast<std::size_t>(frame.node_index)];
            n.leaf = false;
            n.feature = best.feature;
            n.numeric = true;
            n.threshold = best.threshold;
            n.left = li;
            n.right = ri;
            n.gain = best.gain;
            stack.push_back({std::move(right), frame.depth + 1, frame.used_categoricals, ri});
            stack.push_back({std::move(left), frame.depth + 1, frame.used_categoricals, li});
        } else {
            std::map<int, std::vector<std::size_t>> groups;
            for (std::size_t i : frame.idx) groups[ds.codes[i][fi]].push_back(i);
            TreeModel::Node& n = model.nodes_[static_cast<std::size_t>(frame.node_index)];
            n.leaf = false;
            n.feature = best.feature;
            n.numeric = false;
            n.gain = best.gain;
            std::uint32_t used = frame.used_categoricals | (1u << fi);
            for (auto& [code, idx] : groups) {
                int child = static_cast<int>(model.nodes_.size());
                model.nodes_.emplace_back();
                model.nodes_[static_cast<std::size_t>(frame.node_index)]
                    .branches[ds.dictionaries[fi][static_cast<std::size_t>(code)]] = child;
                stack.push_back({std::move(idx), frame.depth + 1, used, child});
            }
        }
    }
    return model;
}

std::array<double, kLabelCount> TreeModel::predict(const FeatureVector& v) const {
    if (nodes_.empty()) throw ConfigError("predict: model not trained");
    std::size_t cur = 0;
    for (;;) {
        const Node& n = nodes_[cur];
        if (n.leaf) return n.probs;
        if (n.numeric) {
            cur = static_cast<std::size_t>(v.numeric(n.feature) <= n.threshold ? n.left
                                                                               : n.right);
        } else {
            auto it = n.branches.find(v.categorical(n.feature));
            if (it == n.branches.end()) return n.probs;  // unseen value fallback
            cur = static_cast<std::size_t>(it->second);
        }
    }
}

ExampleLabel TreeModel::predict_label(const FeatureVector& v) const {
    auto p = predict(v);
    std::size_t best = 0;
    for (std::size_t c = 1; c < kLabelCount; ++c)
        if (p[c] > p[best]) best = c;
    return static_cast<ExampleLabel>(best);
}

int TreeModel::depth() const {
    if (nodes_.empty()) return 0;
    // iterative depth over the children arrays
    std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
    int max_depth = 0;
    while (!stack.empty()) {
        auto [i, d] = stack.back();
        stack.pop_back();
        max_depth = std::max(max_depth, d);
        const Node& n = nodes_[i];
        if (n.leaf) continue;
        if (n.numeric) {
            stack.push_back({static_cast<std::size_t>(n.left), d + 1});
            stack.push_back({static_cast<std::size_t>(n.right), d + 1});
        } else {
            for (const auto& [v, c] : n.branches)
                stack.push_back({static_cast<std::size_t>(c), d + 1});
        }
    }
    return max_depth;
}

double TreeModel::root_gain() const {
    return nodes_.empty() || nodes_[0].leaf ? 0.0 : nodes_[0].gain;
}

FeatureId TreeModel::root_feature() const {
    return nodes_.empty() ? FeatureId::EntityName : nodes_[0].feature;
}

bool TreeModel::root_is_leaf() const { return nodes_.empty() || nodes_[0].leaf; }

std::string TreeModel::to_json() const {
    json root;
    root["version"] = 1;
    json feats = json::array();
    for (FeatureId f : features_) feats.push_back(feature_name(f));
    root["features"] = std::move(feats);
    root["config"] = {{"max_depth", config_.max_depth},
                      {"min_leaf", config_.min_leaf},
                      {"min_gain", config_.min_gain},
                      {"laplace", config_.laplace}};
    json classes = json::array();
    for (std::size_t c = 0; c < kLabelCount; ++c)
        classes.push_back(label_name(static_cast<ExampleLabel>(c)));
    root["classes"] = std::move(classes);
    json nodes = json::array();
    for (const Node& n : nodes_) {
        json jn;
        jn["leaf"] = n.leaf;
        jn["probs"] = n.probs;
        if (!n.leaf) {
            jn["feature"] = feature_name(n.feature);
            jn["gain"] = n.gain;
            if (n.numeric) {
                jn["threshold"] = n.threshold;
                jn["left"] = n.left;
                jn["right"] = n.right;
            } else {
                jn["branches"] = n.branches;
            }
        }
        nodes.push_back(std::move(jn));
    }
    root["nodes"] = std::move(nodes);
    return root.dump();
}

TreeModel TreeModel::from_json(const std::string& text) {
    json root = json::parse(text);
    TreeModel model;
    for (const auto& f : root.at("features")) {
        auto id = feature_from_name(f.get<std::string>());
        if (!id) throw ParseError("model: unknown feature " + f.get<std::string>());
        model.features_.push_back(*id);
    }
    const auto& jc = root.at("config");
    model.config_.max_depth = jc.at("max_depth").get<int>();
    model.config_.min_leaf = jc.at("min_leaf").get<std::size_t>();
    model.config_.min_gain = jc.at("min_gain").get<double>();
    model.config_.laplace = jc.at("laplace").get<double>();
    for (const auto& jn : root.at("nodes")) {
        Node n;
        n.leaf = jn.at("leaf").get<bool>();
        auto probs = jn.at("probs").get<std::vector<double>>();
        if (probs.size() != kLabelCount) throw ParseError("model: bad probs size");
        std::copy(probs.begin(), probs.end(), n.probs.begin());
        if (!n.leaf) {
            auto f = feature_from_name(jn.at("feature").get<std::string>());
            if (!f) throw ParseError("model: unknown split feature");
            n.feature = *f;
            n.gain = jn.value("gain", 0.0);
            if (jn.contains("threshold")) {
                n.numeric = true;
                n.threshold = jn["threshold"].get<double>();
                n.left = jn.at("left").get<int>();
                n.right = jn.at("right").get<int>();
            } else {
                n.branches = jn.at("branches").get<std::map<std::string, int>>();
            }
        }
        model.nodes_.push_back(std::move(n));
    }
    if (model.nodes_.empty()) throw ParseError("model: no nodes");
    return model;
}

}  // namespace conrad
