#include "shsr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "shsr/csv.hpp"
#include "shsr/rng.hpp"

namespace shsr::eval {

Corpus Corpus::build(std::vector<RunRecord> records) {
    Corpus c;
    c.records = std::move(records);
    c.catalog = GroupCatalog::from_records(c.records);
    for (const auto& r : c.records) {
        c.by_dataset[r.dataset_id].push_back(&r);
        c.config_ids.insert(r.config_id);
    }
    return c;
}

std::vector<std::string> Corpus::dataset_ids() const {
    std::vector<std::string> ids;
    ids.reserve(by_dataset.size());
    for (const auto& [id, recs] : by_dataset) ids.push_back(id);
    return ids;
}

Corpus Corpus::restricted_to(const std::set<std::string>& datasets) const {
    std::vector<RunRecord> recs;
    for (const auto& r : records)
        if (datasets.count(r.dataset_id)) recs.push_back(r);
    return Corpus::build(std::move(recs));
}

std::string ShsrPolicy::param() const {
    std::ostringstream os;
    os << "T=" << threshold_;
    return os.str();
}

void ShsrPolicy::fit(const Corpus& train, const meta::MetaFeatureTable& meta, std::uint64_t seed) {
    catalog_ = train.catalog;
    Matrices m = build_matrices(train.records, catalog_, dedup_);
    ActiveSets active = init_active(m.performance);
    seq_ = fit_shsr(m.performance, m.time, meta, threshold_, std::move(active), seed);
}

std::set<std::string> ShsrPolicy::recommend(const std::string& dataset_id,
                                            const meta::MetaFeatureTable& meta,
                                            const std::set<std::string>& configs_on_dataset) {
    ApplyResult applied = apply_filter(seq_, meta, dataset_id);
    std::set<std::string> kept_all = kept_configurations(applied.kept, catalog_);
    std::set<std::string> kept;
    for (const auto& c : configs_on_dataset)
        if (kept_all.count(c) || !catalog_.membership().count(c)) kept.insert(c);
    return kept;
}

namespace {

double total_time(const std::vector<const RunRecord*>& recs,
                  const std::set<std::string>& kept_configs, bool dedup) {
    double own = 0.0;
    std::map<std::string, double> shared;  // shared id -> counted-once time
    for (const RunRecord* r : recs) {
        if (!kept_configs.count(r->config_id)) continue;
        if (dedup && r->shared_cost_id) {
            double& t = shared[*r->shared_cost_id];
            t = std::max(t, r->time_seconds);
        } else {
            own += r->time_seconds;
        }
    }
    for (const auto& [id, t] : shared) own += t;
    return own;
}

}  // namespace

Ratios policy_ratios(const std::vector<const RunRecord*>& dataset_records,
                     const std::set<std::string>& kept_configs, bool dedup_shared_cost) {
    Ratios out;
    double best_all = 0.0, best_kept = kMissing;
    std::set<std::string> all_configs;
    for (const RunRecord* r : dataset_records) {
        all_configs.insert(r->config_id);
        best_all = std::max(best_all, r->performance);
        if (kept_configs.count(r->config_id))
            best_kept = is_missing(best_kept) ? r->performance : std::max(best_kept, r->performance);
    }
    if (is_missing(best_kept)) {
        out.empty_kept = true;
        return out;
    }
    out.perf = best_kept / best_all;
    double t_all = total_time(dataset_records, all_configs, dedup_shared_cost);
    double t_kept = total_time(dataset_records, kept_configs, dedup_shared_cost);
    out.time = t_all > 0.0 ? t_kept / t_all : 1.0;
    return out;
}

EvaluationReport evaluate_holdout(const Corpus& corpus, const meta::MetaFeatureTable& meta,
                                  Policy& policy, int repeats, double test_fraction,
                                  std::uint64_t seed, bool dedup_shared_cost) {
    if (repeats < 1) throw DataError("repeats must be >= 1");
    if (test_fraction <= 0.0 || test_fraction >= 1.0)
        throw DataError("test_fraction must be in (0, 1)");

    EvaluationReport report;
    report.policy_name = policy.name();
    report.policy_param = policy.param();
    report.repeats = repeats;
    report.test_fraction = test_fraction;
    report.seed = seed;

    std::vector<std::string> datasets = corpus.dataset_ids();
    std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(test_fraction * static_cast<double>(datasets.size())));

    for (int rep = 0; rep < repeats; ++rep) {
        std::vector<std::string> order = datasets;
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
        rng.shuffle(order);
        std::set<std::string> test(order.begin(), order.begin() + n_test);
        std::set<std::string> train(order.begin() + n_test, order.end());

        Corpus train_corpus = corpus.restricted_to(train);
        policy.fit(train_corpus, meta, derive_seed(seed, static_cast<std::uint64_t>(rep), 1));

        std::vector<double> perfs, times;
        for (const auto& d : test) {
            const auto& recs = corpus.by_dataset.at(d);
            std::set<std::string> configs;
            for (const RunRecord* r : recs) configs.insert(r->config_id);
            std::set<std::string> kept = policy.recommend(d, meta, configs);
            Ratios ratios = policy_ratios(recs, kept, dedup_shared_cost);

            DatasetResult dr;
            dr.repeat = rep;
            dr.dataset_id = d;
            dr.perf_ratio = ratios.perf;
            dr.time_ratio = ratios.time;
            dr.empty_kept = ratios.empty_kept;
            report.details.push_back(dr);
            if (!ratios.empty_kept) {
                perfs.push_back(ratios.perf);
                times.push_back(ratios.time);
            }
        }
        RepeatResult rr;
        rr.repeat = rep;
        if (!perfs.empty()) {
            rr.mean_perf_ratio = std::accumulate(perfs.begin(), perfs.end(), 0.0) /
                                 static_cast<double>(perfs.size());
            rr.mean_time_ratio = std::accumulate(times.begin(), times.end(), 0.0) /
                                 static_cast<double>(times.size());
        }
        report.per_repeat.push_back(rr);
    }

    std::vector<double> rep_perf, rep_time;
    for (const auto& rr : report.per_repeat) {
        if (!is_missing(rr.mean_perf_ratio)) {
            rep_perf.push_back(rr.mean_perf_ratio);
            rep_time.push_back(rr.mean_time_ratio);
        }
    }
    if (rep_perf.size() >= 2) {
        MeanCI p = gaussian_ci(rep_perf), t = gaussian_ci(rep_time);
        report.perf_mean = p.mean;
        report.perf_ci = p.half_width;
        report.time_mean = t.mean;
        report.time_ci = t.half_width;
    } else if (rep_perf.size() == 1) {
        report.perf_mean = rep_perf[0];
        report.time_mean = rep_time[0];
    }
    return report;
}

std::vector<RunRecord> subsample_results(const std::vector<RunRecord>& records, double fraction,
                                         std::uint64_t seed) {
    if (fraction <= 0.0 || fraction > 1.0) throw DataError("fraction must be in (0, 1]");
    if (fraction == 1.0) return records;
    std::size_t keep = static_cast<std::size_t>(fraction * static_cast<double>(records.size()));
    std::vector<std::size_t> idx(records.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    std::vector<RunRecord> out;
    out.reserve(keep);
    for (std::size_t i : idx) out.push_back(records[i]);
    return out;
}

MeanCI gaussian_ci(const std::vector<double>& values) {
    if (values.size() < 2) throw CIUndefined("gaussian_ci needs at least 2 values");
    double n = static_cast<double>(values.size());
    double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    return {mean, 1.96 * sd / std::sqrt(n)};
}

nlohmann::ordered_json EvaluationReport::to_json() const {
    auto num = [](double v) {
        return is_missing(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v);
    };
    nlohmann::ordered_json j;
    j["policy"] = policy_name;
    j["param"] = policy_param;
    j["repeats"] = repeats;
    j["test_fraction"] = test_fraction;
    j["seed"] = seed;
    j["perf_mean"] = num(perf_mean);
    j["perf_ci"] = num(perf_ci);
    j["time_mean"] = num(time_mean);
    j["time_ci"] = num(time_ci);
    auto& reps = j["per_repeat"] = nlohmann::ordered_json::array();
    for (const auto& rr : per_repeat) {
        nlohmann::ordered_json r;
        r["repeat"] = rr.repeat;
        r["mean_perf_ratio"] = num(rr.mean_perf_ratio);
        r["mean_time_ratio"] = num(rr.mean_time_ratio);
        reps.push_back(std::move(r));
    }
    auto& det = j["details"] = nlohmann::ordered_json::array();
    for (const auto& d : details) {
        nlohmann::ordered_json r;
        r["repeat"] = d.repeat;
        r["dataset_id"] = d.dataset_id;
        r["perf_ratio"] = num(d.perf_ratio);
        r["time_ratio"] = num(d.time_ratio);
        r["empty_kept"] = d.empty_kept;
        det.push_back(std::move(r));
    }
    return j;
}

void emit_plot_data(const std::vector<EvaluationReport>& reports, std::ostream& out) {
    auto fmt = [](double v) {
        if (is_missing(v)) return std::string();
        std::ostringstream os;
        os.precision(17);
        os << v;
        return os.str();
    };
    csv::write_row(out, {"policy", "param", "repeat", "dataset_id", "perf_ratio", "time_ratio",
                         "perf_ci", "time_ci"});
    for (const auto& rep : reports) {
        for (const auto& rr : rep.per_repeat)
            csv::write_row(out, {rep.policy_name, rep.policy_param, std::to_string(rr.repeat), "",
                                 fmt(rr.mean_perf_ratio), fmt(rr.mean_time_ratio), "", ""});
        csv::write_row(out, {rep.policy_name, rep.policy_param, "", "", fmt(rep.perf_mean),
                             fmt(rep.time_mean), fmt(rep.perf_ci), fmt(rep.time_ci)});
    }
}

}  // namespace shsr::eval
