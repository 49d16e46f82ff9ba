#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace shsr::cart {

struct CartError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct EmptyTrainingSet : CartError {
    using CartError::CartError;
};
struct MissingFeature : CartError {
    using CartError::CartError;
};

struct Node {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double prediction = 0.0;
    int n_train = 0;
    double sse = 0.0;  // SSE of training targets routed here, as if leaf
};

// Binary regression tree; splits minimize sum of squared errors,
// thresholds sit at midpoints of consecutive distinct values, samples
// route right iff value >= threshold.
struct RegressionTree {
    std::vector<Node> nodes;
    int root = 0;
    bool mean_fallback = false;  // set when tuning fell back to a mean leaf

    double predict(const std::vector<double>& x) const;
    std::size_t n_leaves() const;

    nlohmann::ordered_json to_json() const;
    static RegressionTree from_json(const nlohmann::json& j);
};

// Nested subtrees from weakest-link cost-complexity pruning; alphas are
// strictly increasing, alphas[0] == 0 holds the full tree, the last
// entry is the root-only tree.
struct PruningPath {
    std::vector<double> alphas;
    std::vector<RegressionTree> trees;

    // subtree for the largest path alpha <= alpha
    const RegressionTree& at_alpha(double alpha) const;
};

struct TreeHyperParams {
    int min_samples_leaf = 3;  // grid {3, 5, 7}
    double alpha = 0.0;
};

// X: rows are samples, columns are features; no missing values.
RegressionTree grow_tree(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                         int min_samples_leaf);

PruningPath prune_path(const RegressionTree& tree);

struct TunedTree {
    RegressionTree tree;
    TreeHyperParams params;
    double cv_mse = 0.0;
};

// 5-fold CV over min_samples_leaf {3,5,7} x the pruning-path alphas,
// scored by mean squared error; ties prefer larger alpha, then larger
// min_samples_leaf; the winner is refit on all data. N < 5 falls back
// to a single mean leaf with mean_fallback set.
TunedTree tune_and_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                       std::uint64_t seed);

}  // namespace shsr::cart
