#include "shsr/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "shsr/rng.hpp"

namespace shsr::cart {

namespace {

constexpr double kTol = 1e-12;

struct TargetStats {
    double sum = 0.0;
    double sumsq = 0.0;
    std::size_t n = 0;

    void add(double v) {
        sum += v;
        sumsq += v * v;
        ++n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double sse() const {
        if (n == 0) return 0.0;
        double s = sumsq - sum * sum / static_cast<double>(n);
        return s > 0.0 ? s : 0.0;
    }
};

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

SplitChoice best_split(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                       const std::vector<int>& idx, int min_samples_leaf) {
    const std::size_t n = idx.size();
    const std::size_t n_features = X[idx[0]].size();
    SplitChoice best;
    std::vector<int> order(idx);
    for (std::size_t f = 0; f < n_features; ++f) {
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return X[a][f] < X[b][f]; });
        TargetStats left, right;
        for (int i : order) right.add(y[i]);
        for (std::size_t k = 1; k < n; ++k) {
            double v = y[order[k - 1]];
            left.add(v);
            right.sum -= v;
            right.sumsq -= v * v;
            --right.n;
            double lo = X[order[k - 1]][f];
            double hi = X[order[k]][f];
            if (lo == hi) continue;  // split only between distinct values
            if (left.n < static_cast<std::size_t>(min_samples_leaf) ||
                right.n < static_cast<std::size_t>(min_samples_leaf))
                continue;
            double split_sse = left.sse() + right.sse();
            // ties keep the lowest feature index, then lowest threshold
            if (split_sse < best.sse - kTol) {
                best.found = true;
                best.feature = static_cast<int>(f);
                best.threshold = lo + (hi - lo) / 2.0;
                best.sse = split_sse;
            }
        }
    }
    return best;
}

int build(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
          std::vector<int>&& idx, int min_samples_leaf, std::vector<Node>& nodes) {
    TargetStats stats;
    for (int i : idx) stats.add(y[i]);

    int me = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[me].prediction = stats.mean();
    nodes[me].n_train = static_cast<int>(idx.size());
    nodes[me].sse = stats.sse();

    if (stats.sse() <= kTol) return me;
    SplitChoice split = best_split(X, y, idx, min_samples_leaf);
    if (!split.found || split.sse >= stats.sse() - kTol) return me;  // no impurity gain

    std::vector<int> left_idx, right_idx;
    for (int i : idx) {
        if (X[i][split.feature] >= split.threshold)
            right_idx.push_back(i);
        else
            left_idx.push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    nodes[me].leaf = false;
    nodes[me].feature = split.feature;
    nodes[me].threshold = split.threshold;
    int l = build(X, y, std::move(left_idx), min_samples_leaf, nodes);
    nodes[me].left = l;
    int r = build(X, y, std::move(right_idx), min_samples_leaf, nodes);
    nodes[me].right = r;
    return me;
}

}  // namespace

double RegressionTree::predict(const std::vector<double>& x) const {
    int i = root;
    while (!nodes[i].leaf) {
        const Node& nd = nodes[i];
        if (static_cast<std::size_t>(nd.feature) >= x.size() || std::isnan(x[nd.feature]))
            throw MissingFeature("feature " + std::to_string(nd.feature) + " unavailable");
        i = x[nd.feature] >= nd.threshold ? nd.right : nd.left;
    }
    return nodes[i].prediction;
}

std::size_t RegressionTree::n_leaves() const {
    std::size_t c = 0;
    for (const auto& nd : nodes)
        if (nd.leaf) ++c;
    return c;
}

nlohmann::ordered_json RegressionTree::to_json() const {
    nlohmann::ordered_json j;
    j["root"] = root;
    j["mean_fallback"] = mean_fallback;
    auto& arr = j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& nd : nodes) {
        nlohmann::ordered_json n;
        n["leaf"] = nd.leaf;
        n["feature"] = nd.feature;
        n["threshold"] = nd.threshold;
        n["left"] = nd.left;
        n["right"] = nd.right;
        n["prediction"] = nd.prediction;
        n["n_train"] = nd.n_train;
        arr.push_back(std::move(n));
    }
    return j;
}

RegressionTree RegressionTree::from_json(const nlohmann::json& j) {
    RegressionTree t;
    t.root = j.at("root").get<int>();
    t.mean_fallback = j.at("mean_fallback").get<bool>();
    for (const auto& n : j.at("nodes")) {
        Node nd;
        nd.leaf = n.at("leaf").get<bool>();
        nd.feature = n.at("feature").get<int>();
        nd.threshold = n.at("threshold").get<double>();
        nd.left = n.at("left").get<int>();
        nd.right = n.at("right").get<int>();
        nd.prediction = n.at("prediction").get<double>();
        nd.n_train = n.at("n_train").get<int>();
        t.nodes.push_back(nd);
    }
    return t;
}

const RegressionTree& PruningPath::at_alpha(double alpha) const {
    std::size_t best = 0;
    for (std::size_t i = 0; i < alphas.size(); ++i)
        if (alphas[i] <= alpha + kTol) best = i;
    return trees[best];
}

RegressionTree grow_tree(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                         int min_samples_leaf) {
    if (y.empty()) throw EmptyTrainingSet("grow_tree: no samples");
    if (X.size() != y.size()) throw CartError("grow_tree: X/y size mismatch");
    RegressionTree t;
    std::vector<int> idx(y.size());
    std::iota(idx.begin(), idx.end(), 0);
    t.root = build(X, y, std::move(idx), std::max(1, min_samples_leaf), t.nodes);
    return t;
}

namespace {

// snapshot the working tree with pruned[] nodes collapsed to leaves
RegressionTree extract(const RegressionTree& t, const std::vector<bool>& pruned) {
    RegressionTree out;
    out.mean_fallback = t.mean_fallback;
    std::vector<std::pair<int, int>> stack;  // (old index, parent new index * 2 + side)
    auto copy_rec = [&](auto&& self, int old) -> int {
        int ni = static_cast<int>(out.nodes.size());
        out.nodes.push_back(t.nodes[old]);
        if (pruned[old] || t.nodes[old].leaf) {
            out.nodes[ni].leaf = true;
            out.nodes[ni].feature = -1;
            out.nodes[ni].left = out.nodes[ni].right = -1;
            out.nodes[ni].threshold = 0.0;
        } else {
            int l = self(self, t.nodes[old].left);
            out.nodes[ni].left = l;
            int r = self(self, t.nodes[old].right);
            out.nodes[ni].right = r;
        }
        return ni;
    };
    out.root = copy_rec(copy_rec, t.root);
    return out;
}

}  // namespace

PruningPath prune_path(const RegressionTree& tree) {
    PruningPath path;
    path.alphas.push_back(0.0);
    path.trees.push_back(tree);

    std::vector<bool> pruned(tree.nodes.size(), false);

    auto subtree_stats = [&](auto&& self, int i, double& sse, std::size_t& leaves) -> void {
        const Node& nd = tree.nodes[i];
        if (nd.leaf || pruned[i]) {
            sse += nd.sse;
            leaves += 1;
            return;
        }
        self(self, nd.left, sse, leaves);
        self(self, nd.right, sse, leaves);
    };

    auto is_internal = [&](int i) { return !tree.nodes[i].leaf && !pruned[i]; };

    while (is_internal(tree.root)) {
        // weakest link: min (SSE_collapsed - SSE_subtree) / (leaves - 1)
        double min_g = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            if (!is_internal(static_cast<int>(i))) continue;
            double sse = 0.0;
            std::size_t leaves = 0;
            subtree_stats(subtree_stats, static_cast<int>(i), sse, leaves);
            double g = (tree.nodes[i].sse - sse) / static_cast<double>(leaves - 1);
            min_g = std::min(min_g, g);
        }
        auto mark = [&](auto&& self, int i) -> void {
            pruned[i] = true;
            if (!tree.nodes[i].leaf) {
                self(self, tree.nodes[i].left);
                self(self, tree.nodes[i].right);
            }
        };
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            if (!is_internal(static_cast<int>(i))) continue;
            double sse = 0.0;
            std::size_t leaves = 0;
            subtree_stats(subtree_stats, static_cast<int>(i), sse, leaves);
            double g = (tree.nodes[i].sse - sse) / static_cast<double>(leaves - 1);
            if (g <= min_g + kTol) mark(mark, static_cast<int>(i));
        }
        double alpha = std::max(min_g, path.alphas.back());
        RegressionTree snap = extract(tree, pruned);
        if (alpha > path.alphas.back() + kTol) {
            path.alphas.push_back(alpha);
            path.trees.push_back(std::move(snap));
        } else {
            path.trees.back() = std::move(snap);
        }
    }
    return path;
}

namespace {

RegressionTree mean_leaf(const std::vector<double>& y, bool fallback) {
    TargetStats stats;
    for (double v : y) stats.add(v);
    RegressionTree t;
    t.nodes.emplace_back();
    t.nodes[0].prediction = stats.mean();
    t.nodes[0].n_train = static_cast<int>(y.size());
    t.nodes[0].sse = stats.sse();
    t.mean_fallback = fallback;
    return t;
}

}  // namespace

TunedTree tune_and_fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y,
                       std::uint64_t seed) {
    const std::size_t n = y.size();
    if (n == 0) throw EmptyTrainingSet("tune_and_fit: no samples");

    static const int kLeafGrid[] = {3, 5, 7};

    if (n < 5) {
        TunedTree r;
        r.tree = mean_leaf(y, true);
        r.params = {kLeafGrid[0], 0.0};
        return r;
    }

    // candidate alphas come from the full-data pruning path of each leaf size
    std::vector<PruningPath> full_paths;
    struct Candidate {
        int msl;
        double alpha;
        std::size_t path_index;  // index into full_paths for refit
    };
    std::vector<Candidate> candidates;
    for (std::size_t li = 0; li < 3; ++li) {
        int msl = kLeafGrid[li];
        full_paths.push_back(prune_path(grow_tree(X, y, msl)));
        for (double a : full_paths.back().alphas) candidates.push_back({msl, a, li});
    }

    // seeded shuffle, 5 contiguous folds
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(perm);

    constexpr int kFolds = 5;
    std::vector<std::vector<double>> fold_mse(kFolds, std::vector<double>(candidates.size(), 0.0));

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int f = 0; f < kFolds; ++f) {
        std::size_t lo = n * f / kFolds, hi = n * (f + 1) / kFolds;
        std::vector<std::vector<double>> Xtr, Xval;
        std::vector<double> ytr, yval;
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= lo && i < hi) {
                Xval.push_back(X[perm[i]]);
                yval.push_back(y[perm[i]]);
            } else {
                Xtr.push_back(X[perm[i]]);
                ytr.push_back(y[perm[i]]);
            }
        }
        for (std::size_t li = 0; li < 3; ++li) {
            PruningPath p = prune_path(grow_tree(Xtr, ytr, kLeafGrid[li]));
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                if (candidates[c].path_index != li) continue;
                const RegressionTree& t = p.at_alpha(candidates[c].alpha);
                double err = 0.0;
                for (std::size_t i = 0; i < yval.size(); ++i) {
                    double d = t.predict(Xval[i]) - yval[i];
                    err += d * d;
                }
                fold_mse[f][c] = err / static_cast<double>(yval.size());
            }
        }
    }

    // mean MSE over folds, fold order fixed; ties prefer larger alpha,
    // then larger min_samples_leaf
    std::size_t best_c = 0;
    double best_mse = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        double mse = 0.0;
        for (int f = 0; f < kFolds; ++f) mse += fold_mse[f][c];
        mse /= kFolds;
        bool better = mse < best_mse - kTol;
        if (!better && mse < best_mse + kTol) {
            const Candidate& cur = candidates[c];
            const Candidate& old = candidates[best_c];
            better = cur.alpha > old.alpha + kTol ||
                     (std::abs(cur.alpha - old.alpha) <= kTol && cur.msl > old.msl);
        }
        if (better) {
            best_c = c;
            best_mse = mse;
        }
    }

    TunedTree r;
    r.params = {candidates[best_c].msl, candidates[best_c].alpha};
    r.cv_mse = best_mse;
    r.tree = full_paths[candidates[best_c].path_index].at_alpha(candidates[best_c].alpha);
    return r;
}

}  // namespace shsr::cart
