#include "shsr/shsr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "shsr/rng.hpp"

namespace shsr {

nlohmann::ordered_json FilterSequence::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = "shsr.filter_sequence.v1";
    j["threshold"] = threshold;
    j["groups"] = groups;
    j["feature_names"] = feature_names;
    j["imputation_means"] = imputation_means;
    auto& steps_j = j["steps"] = nlohmann::ordered_json::array();
    for (const auto& s : steps) {
        nlohmann::ordered_json sj;
        sj["group_id"] = s.group_id;
        sj["time_saved_at_fit"] = s.time_saved_at_fit;
        sj["covered_at_fit"] = s.covered_at_fit;
        sj["tree"] = s.model.to_json();
        steps_j.push_back(std::move(sj));
    }
    return j;
}

FilterSequence FilterSequence::from_json(const nlohmann::json& j) {
    if (j.at("format").get<std::string>() != "shsr.filter_sequence.v1")
        throw DataError("unsupported filter-sequence format");
    FilterSequence seq;
    seq.threshold = j.at("threshold").get<double>();
    seq.groups = j.at("groups").get<std::vector<std::string>>();
    seq.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    seq.imputation_means = j.at("imputation_means").get<std::vector<double>>();
    for (const auto& sj : j.at("steps")) {
        FilterStep s;
        s.group_id = sj.at("group_id").get<std::string>();
        s.time_saved_at_fit = sj.at("time_saved_at_fit").get<double>();
        s.covered_at_fit = sj.at("covered_at_fit").get<std::set<std::string>>();
        s.model = cart::RegressionTree::from_json(sj.at("tree"));
        seq.steps.push_back(std::move(s));
    }
    return seq;
}

LeaveOneOutTargets leave_one_out_targets(const RatioMatrix& performance, std::size_t group,
                                         const std::set<std::size_t>& active_g) {
    LeaveOneOutTargets out;
    for (std::size_t d : active_g) {
        double best = kMissing;
        for (std::size_t i = 0; i < performance.rows(); ++i) {
            if (i == group || !performance.present(i, d)) continue;
            best = is_missing(best) ? performance.at(i, d) : std::max(best, performance.at(i, d));
        }
        if (is_missing(best)) {
            out.excluded.push_back(d);
        } else {
            out.usable.push_back(d);
            out.targets.push_back(best);
        }
    }
    return out;
}

namespace {

// meta-feature rows for each dataset column, mean-imputed over the
// corpus; means are kept for apply time
struct ImputedFeatures {
    std::vector<std::string> names;
    std::vector<double> means;
    std::vector<std::vector<double>> rows;  // per dataset column
};

ImputedFeatures impute_features(const meta::MetaFeatureTable& meta,
                                const std::vector<std::string>& dataset_ids) {
    ImputedFeatures out;
    out.names = meta.feature_names;
    const std::size_t f = out.names.size();
    out.rows.reserve(dataset_ids.size());
    for (const auto& id : dataset_ids) out.rows.push_back(meta.row(id));

    out.means.assign(f, 0.0);
    for (std::size_t j = 0; j < f; ++j) {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (const auto& r : out.rows)
            if (!is_missing(r[j])) {
                sum += r[j];
                ++cnt;
            }
        out.means[j] = cnt ? sum / static_cast<double>(cnt) : 0.0;
    }
    for (auto& r : out.rows)
        for (std::size_t j = 0; j < f; ++j)
            if (is_missing(r[j])) r[j] = out.means[j];
    return out;
}

struct GroupFit {
    cart::RegressionTree model;
    std::set<std::size_t> covered;
    double savings = 0.0;
};

}  // namespace

FilterSequence fit_shsr(const RatioMatrix& performance, const TimeMatrix& time,
                        const meta::MetaFeatureTable& meta, double threshold,
                        ActiveSets active, std::uint64_t seed) {
    const std::size_t n_groups = performance.rows();
    FilterSequence seq;
    seq.threshold = threshold;
    seq.groups = performance.row_ids();
    if (n_groups == 0 || performance.cols() == 0) return seq;

    ImputedFeatures feats = impute_features(meta, performance.col_ids());
    seq.feature_names = feats.names;
    seq.imputation_means = feats.means;

    for (std::uint64_t iteration = 0;; ++iteration) {
        std::vector<GroupFit> fits(n_groups);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
        for (std::int64_t gi = 0; gi < static_cast<std::int64_t>(n_groups); ++gi) {
            std::size_t g = static_cast<std::size_t>(gi);
            LeaveOneOutTargets loo = leave_one_out_targets(performance, g, active[g]);
            if (loo.usable.empty()) continue;
            std::vector<std::vector<double>> X;
            X.reserve(loo.usable.size());
            for (std::size_t d : loo.usable) X.push_back(feats.rows[d]);
            cart::TunedTree tuned =
                cart::tune_and_fit(X, loo.targets, derive_seed(seed, iteration, g));
            GroupFit& fit = fits[g];
            fit.model = std::move(tuned.tree);
            for (std::size_t i = 0; i < loo.usable.size(); ++i) {
                if (fit.model.predict(X[i]) >= threshold) {
                    std::size_t d = loo.usable[i];
                    fit.covered.insert(d);
                    if (time.present(g, d)) fit.savings += time.at(g, d);
                }
            }
        }

        // argmax savings; ties go to the first group in catalog order
        std::size_t best_g = n_groups;
        double best_savings = 0.0;
        for (std::size_t g = 0; g < n_groups; ++g) {
            if (fits[g].savings > best_savings) {
                best_savings = fits[g].savings;
                best_g = g;
            }
        }
        if (best_g == n_groups) break;  // no remaining time savings

        FilterStep step;
        step.group_id = seq.groups[best_g];
        step.model = std::move(fits[best_g].model);
        step.time_saved_at_fit = best_savings;
        for (std::size_t d : fits[best_g].covered) {
            step.covered_at_fit.insert(performance.col_ids()[d]);
            active[best_g].erase(d);
        }
        seq.steps.push_back(std::move(step));
    }
    return seq;
}

ApplyResult apply_filter(const FilterSequence& seq, const std::vector<double>& features) {
    std::vector<double> x = features;
    x.resize(seq.imputation_means.size(), kMissing);
    for (std::size_t j = 0; j < x.size(); ++j)
        if (is_missing(x[j])) x[j] = seq.imputation_means[j];

    ApplyResult res;
    res.kept.insert(seq.groups.begin(), seq.groups.end());
    for (const auto& step : seq.steps) {
        if (res.dropped.count(step.group_id)) continue;
        if (step.model.predict(x) < seq.threshold) continue;
        if (res.kept.size() == 1) {
            res.safeguard_triggered = true;  // never empty the kept set
            continue;
        }
        res.dropped.insert(step.group_id);
        res.kept.erase(step.group_id);
    }
    return res;
}

ApplyResult apply_filter(const FilterSequence& seq, const meta::MetaFeatureTable& meta,
                         const std::string& dataset_id) {
    const std::vector<double>& raw = meta.row(dataset_id);
    std::vector<double> x(seq.feature_names.size(), kMissing);
    for (std::size_t j = 0; j < seq.feature_names.size(); ++j) {
        auto it = std::find(meta.feature_names.begin(), meta.feature_names.end(),
                            seq.feature_names[j]);
        if (it != meta.feature_names.end())
            x[j] = raw[static_cast<std::size_t>(it - meta.feature_names.begin())];
    }
    return apply_filter(seq, x);
}

std::set<std::string> kept_configurations(const std::set<std::string>& kept_groups,
                                          const GroupCatalog& catalog) {
    std::set<std::string> kept;
    for (const auto& [config, groups] : catalog.membership()) {
        bool ok = true;
        for (const auto& g : groups)
            if (!kept_groups.count(g)) {
                ok = false;
                break;
            }
        if (ok) kept.insert(config);
    }
    return kept;
}

}  // namespace shsr
