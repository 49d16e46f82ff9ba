#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shsr/data_model.hpp"
#include "shsr/metafeatures.hpp"
#include "shsr/shsr.hpp"

namespace shsr::eval {

struct CIUndefined : DataError {
    using DataError::DataError;
};

// Run records indexed for evaluation. Move-only: by_dataset points into
// records (vector moves keep the heap buffer, so moving is safe).
struct Corpus {
    Corpus() = default;
    Corpus(const Corpus&) = delete;
    Corpus& operator=(const Corpus&) = delete;
    Corpus(Corpus&&) = default;
    Corpus& operator=(Corpus&&) = default;

    std::vector<RunRecord> records;
    GroupCatalog catalog;
    std::map<std::string, std::vector<const RunRecord*>> by_dataset;
    std::set<std::string> config_ids;

    static Corpus build(std::vector<RunRecord> records);
    std::vector<std::string> dataset_ids() const;
    Corpus restricted_to(const std::set<std::string>& datasets) const;
};

// A filtering policy: fit on a training corpus, then name the kept
// configurations for one test dataset.
class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual std::string param() const = 0;
    virtual void fit(const Corpus& train, const meta::MetaFeatureTable& meta,
                     std::uint64_t seed) = 0;
    virtual std::set<std::string> recommend(const std::string& dataset_id,
                                            const meta::MetaFeatureTable& meta,
                                            const std::set<std::string>& configs_on_dataset) = 0;
};

class IdentityPolicy final : public Policy {
public:
    std::string name() const override { return "identity"; }
    std::string param() const override { return ""; }
    void fit(const Corpus&, const meta::MetaFeatureTable&, std::uint64_t) override {}
    std::set<std::string> recommend(const std::string&, const meta::MetaFeatureTable&,
                                    const std::set<std::string>& configs) override {
        return configs;
    }
};

class ShsrPolicy final : public Policy {
public:
    ShsrPolicy(double threshold, bool dedup_shared_cost = true)
        : threshold_(threshold), dedup_(dedup_shared_cost) {}
    std::string name() const override { return "shsr"; }
    std::string param() const override;
    void fit(const Corpus& train, const meta::MetaFeatureTable& meta, std::uint64_t seed) override;
    std::set<std::string> recommend(const std::string& dataset_id,
                                    const meta::MetaFeatureTable& meta,
                                    const std::set<std::string>& configs_on_dataset) override;
    const FilterSequence& sequence() const { return seq_; }

private:
    double threshold_;
    bool dedup_;
    FilterSequence seq_;
    GroupCatalog catalog_;
};

struct DatasetResult {
    int repeat = 0;
    std::string dataset_id;
    double perf_ratio = kMissing;  // missing when the kept set was empty
    double time_ratio = kMissing;
    bool empty_kept = false;
};

struct RepeatResult {
    int repeat = 0;
    double mean_perf_ratio = kMissing;
    double mean_time_ratio = kMissing;
};

struct EvaluationReport {
    std::string policy_name;
    std::string policy_param;
    int repeats = 0;
    double test_fraction = 0.0;
    std::uint64_t seed = 0;
    std::vector<DatasetResult> details;
    std::vector<RepeatResult> per_repeat;
    double perf_mean = kMissing, perf_ci = kMissing;
    double time_mean = kMissing, time_ci = kMissing;

    nlohmann::ordered_json to_json() const;
};

struct Ratios {
    double perf = kMissing;
    double time = kMissing;
    bool empty_kept = false;
};

// perf: max perf among kept / max perf among all on the dataset;
// time: summed time kept / summed time all, shared costs counted once
// per shared id on both sides
Ratios policy_ratios(const std::vector<const RunRecord*>& dataset_records,
                     const std::set<std::string>& kept_configs, bool dedup_shared_cost = true);

// repeated seeded holdout: fit the policy on (1 - test_fraction) of the
// datasets, measure ratios on the rest, aggregate with Gaussian CIs
EvaluationReport evaluate_holdout(const Corpus& corpus, const meta::MetaFeatureTable& meta,
                                  Policy& policy, int repeats, double test_fraction,
                                  std::uint64_t seed, bool dedup_shared_cost = true);

// uniform seeded sample of floor(fraction * N) records, order preserved
std::vector<RunRecord> subsample_results(const std::vector<RunRecord>& records, double fraction,
                                         std::uint64_t seed);

struct MeanCI {
    double mean = 0.0;
    double half_width = 0.0;
};

// mean +/- 1.96 * sd / sqrt(n), sample (n-1) standard deviation
MeanCI gaussian_ci(const std::vector<double>& values);

// tidy CSV: one row per (policy, param, repeat) plus one aggregate row
// per report carrying the CI columns
void emit_plot_data(const std::vector<EvaluationReport>& reports, std::ostream& out);

}  // namespace shsr::eval
