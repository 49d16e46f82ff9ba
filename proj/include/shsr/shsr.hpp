#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shsr/cart.hpp"
#include "shsr/data_model.hpp"
#include "shsr/metafeatures.hpp"

namespace shsr {

struct FilterStep {
    std::string group_id;
    cart::RegressionTree model;
    double time_saved_at_fit = 0.0;
    std::set<std::string> covered_at_fit;
};

// Greedy sequence of per-group filter models plus everything needed to
// apply them to a new dataset (feature order and imputation statistics
// recorded at fit time).
struct FilterSequence {
    double threshold = 0.0;
    std::vector<std::string> groups;  // catalog order
    std::vector<std::string> feature_names;
    std::vector<double> imputation_means;
    std::vector<FilterStep> steps;

    nlohmann::ordered_json to_json() const;
    static FilterSequence from_json(const nlohmann::json& j);
};

struct LeaveOneOutTargets {
    std::vector<std::size_t> usable;    // dataset columns, ascending
    std::vector<double> targets;        // aligned with usable
    std::vector<std::size_t> excluded;  // active datasets with no other group present
};

// y_d = max over groups i != g with P[i,d] present, for d in active_g
LeaveOneOutTargets leave_one_out_targets(const RatioMatrix& performance, std::size_t group,
                                         const std::set<std::size_t>& active_g);

// Greedy fit: per iteration fit one tree per group on the leave-one-out
// targets, cover datasets predicted >= threshold, pick the group with
// the largest covered execution time (ties break to the first group in
// catalog order), and recurse on the shrunk active sets until no group
// saves any time.
FilterSequence fit_shsr(const RatioMatrix& performance, const TimeMatrix& time,
                        const meta::MetaFeatureTable& meta, double threshold,
                        ActiveSets active, std::uint64_t seed);

struct ApplyResult {
    std::set<std::string> dropped;
    std::set<std::string> kept;
    bool safeguard_triggered = false;
};

// Run the steps in order on one dataset's meta-features; a step that
// would empty the kept set is skipped and flagged.
ApplyResult apply_filter(const FilterSequence& seq, const std::vector<double>& features);

// features given by name; missing names impute to the recorded means
ApplyResult apply_filter(const FilterSequence& seq, const meta::MetaFeatureTable& meta,
                         const std::string& dataset_id);

// a configuration survives iff none of its groups was dropped
std::set<std::string> kept_configurations(const std::set<std::string>& kept_groups,
                                          const GroupCatalog& catalog);

}  // namespace shsr
