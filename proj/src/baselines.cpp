#include "shsr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "shsr/rng.hpp"

namespace shsr::baselines {

std::set<std::string> random_elimination(const std::set<std::string>& config_ids, double fraction,
                                         std::uint64_t seed) {
    if (fraction < 0.0 || fraction >= 1.0) throw DataError("fraction must be in [0, 1)");
    std::vector<std::string> ids(config_ids.begin(), config_ids.end());
    Rng rng(seed);
    rng.shuffle(ids);
    std::size_t remove = static_cast<std::size_t>(fraction * static_cast<double>(ids.size()));
    return {ids.begin() + remove, ids.end()};
}

double arr_score(double perf_p, double perf_q, double time_p, double time_q, double acc_d,
                 bool* clamped) {
    constexpr double kMinTime = 1e-9;  // zero recorded times would break the log term
    double denom = 1.0 + acc_d * std::log(std::max(time_p, kMinTime) / std::max(time_q, kMinTime));
    if (denom <= 0.0) {
        denom = 1e-6;
        if (clamped) *clamped = true;
    } else if (clamped) {
        *clamped = false;
    }
    return (perf_p / perf_q) / denom;
}

namespace {

// z-score stats over the training datasets; zero-variance features are
// dropped, missing values imputed to the mean
struct MetaNormalizer {
    std::vector<std::size_t> kept;  // feature indices
    std::vector<double> mean, sd;

    static MetaNormalizer fit(const meta::MetaFeatureTable& meta,
                              const std::vector<std::string>& dataset_ids) {
        const std::size_t f = meta.feature_names.size();
        MetaNormalizer n;
        for (std::size_t j = 0; j < f; ++j) {
            double sum = 0.0, sumsq = 0.0;
            std::size_t cnt = 0;
            for (const auto& id : dataset_ids) {
                double v = meta.row(id)[j];
                if (is_missing(v)) continue;
                sum += v;
                sumsq += v * v;
                ++cnt;
            }
            if (cnt == 0) continue;
            double m = sum / static_cast<double>(cnt);
            double var = sumsq / static_cast<double>(cnt) - m * m;
            if (var <= 0.0) continue;
            n.kept.push_back(j);
            n.mean.push_back(m);
            n.sd.push_back(std::sqrt(var));
        }
        return n;
    }

    std::vector<double> transform(const std::vector<double>& raw) const {
        std::vector<double> out(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) {
            double v = kept[i] < raw.size() ? raw[kept[i]] : kMissing;
            out[i] = is_missing(v) ? 0.0 : (v - mean[i]) / sd[i];
        }
        return out;
    }
};

}  // namespace

std::vector<std::string> knn_rank(const eval::Corpus& train, const meta::MetaFeatureTable& meta,
                                  const std::vector<double>& x_new, const ArrParams& params) {
    if (train.records.empty()) throw DataError("knn_rank: empty training corpus");

    std::vector<std::string> datasets;
    for (const auto& id : train.dataset_ids())
        if (meta.rows.count(id)) datasets.push_back(id);
    if (datasets.empty()) throw DataError("knn_rank: no training dataset has meta-features");

    MetaNormalizer norm = MetaNormalizer::fit(meta, datasets);
    std::vector<double> q = norm.transform(x_new);

    std::vector<std::pair<double, std::string>> dist;
    for (const auto& id : datasets) {
        std::vector<double> z = norm.transform(meta.row(id));
        double d2 = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) d2 += (z[i] - q[i]) * (z[i] - q[i]);
        dist.emplace_back(d2, id);
    }
    std::sort(dist.begin(), dist.end());
    std::size_t n_neighbors = std::min<std::size_t>(params.n_neighbors, dist.size());

    // per config: sum of log(per-dataset mean ARR) over the neighbors
    // where it is present
    std::map<std::string, std::pair<double, std::size_t>> scores;
    for (std::size_t ni = 0; ni < n_neighbors; ++ni) {
        const auto& recs = train.by_dataset.at(dist[ni].second);
        for (const RunRecord* p : recs) {
            double sum = 0.0;
            std::size_t cnt = 0;
            for (const RunRecord* r : recs) {
                if (r == p) continue;
                sum += arr_score(p->performance, r->performance, p->time_seconds, r->time_seconds,
                                 params.acc_d);
                ++cnt;
            }
            double mean_arr = cnt ? sum / static_cast<double>(cnt) : 1.0;
            auto& [logsum, n] = scores[p->config_id];
            logsum += std::log(std::max(mean_arr, 1e-300));
            ++n;
        }
    }

    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& c : train.config_ids) {
        auto it = scores.find(c);
        double score = it == scores.end()
                           ? -std::numeric_limits<double>::infinity()  // absent on all neighbors
                           : it->second.first / static_cast<double>(it->second.second);
        ranked.emplace_back(-score, c);  // descending score, then ascending id
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::string> out;
    out.reserve(ranked.size());
    for (const auto& [s, c] : ranked) out.push_back(c);
    return out;
}

std::set<std::string> knn_recommend(const eval::Corpus& train, const meta::MetaFeatureTable& meta,
                                    const std::vector<double>& x_new, const ArrParams& params) {
    std::vector<std::string> ranked = knn_rank(train, meta, x_new, params);
    std::size_t m = std::min(params.top_m, ranked.size());
    return {ranked.begin(), ranked.begin() + m};
}

std::string RandomEliminationPolicy::param() const {
    std::ostringstream os;
    os << "frac=" << fraction_;
    return os.str();
}

void RandomEliminationPolicy::fit(const eval::Corpus& train, const meta::MetaFeatureTable&,
                                  std::uint64_t seed) {
    kept_ = random_elimination(train.config_ids, fraction_, seed);
}

std::set<std::string> RandomEliminationPolicy::recommend(
    const std::string&, const meta::MetaFeatureTable&,
    const std::set<std::string>& configs_on_dataset) {
    std::set<std::string> out;
    for (const auto& c : configs_on_dataset)
        if (kept_.count(c)) out.insert(c);
    return out;
}

std::string KnnArrPolicy::param() const {
    std::ostringstream os;
    os << "N=" << params_.n_neighbors << ",accd=" << params_.acc_d << ",m=" << params_.top_m;
    return os.str();
}

void KnnArrPolicy::fit(const eval::Corpus& train, const meta::MetaFeatureTable& meta,
                       std::uint64_t) {
    train_ = &train;
    meta_ = &meta;
}

std::set<std::string> KnnArrPolicy::recommend(const std::string& dataset_id,
                                              const meta::MetaFeatureTable& meta,
                                              const std::set<std::string>& configs_on_dataset) {
    std::set<std::string> top = knn_recommend(*train_, *meta_, meta.row(dataset_id), params_);
    std::set<std::string> out;
    for (const auto& c : configs_on_dataset)
        if (top.count(c)) out.insert(c);
    return out;
}

}  // namespace shsr::baselines
