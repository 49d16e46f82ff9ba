#include <doctest.h>

#include <cmath>

#include "shsr/baselines.hpp"
#include "shsr/rng.hpp"

using namespace shsr;
using namespace shsr::baselines;

namespace {

RunRecord rec(const std::string& d, const std::string& c, double perf, double t) {
    RunRecord r;
    r.dataset_id = d;
    r.config_id = c;
    r.group_ids = {"g"};
    r.performance = perf;
    r.time_seconds = t;
    return r;
}

}  // namespace

TEST_CASE("random_elimination keeps exact counts, seed-stable") {
    std::set<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.insert("c" + std::to_string(i));

    CHECK(random_elimination(ids, 0.0, 1) == ids);

    auto kept = random_elimination(ids, 0.3, 1);
    CHECK(kept.size() == 7);
    CHECK(random_elimination(ids, 0.3, 1) == kept);
    CHECK(random_elimination(ids, 0.99, 5).size() == 1);  // never empty

    for (const auto& c : kept) CHECK(ids.count(c));
}

TEST_CASE("arr_score closed-form values") {
    // equal times: the log term vanishes for any acc_d
    for (double accd : {0.0, 0.001, 0.1})
        CHECK(arr_score(0.9, 0.8, 5.0, 5.0, accd) == doctest::Approx(1.125));

    // acc_d = 0 reduces to the performance ratio
    CHECK(arr_score(0.9, 0.8, 1.0, 100.0, 0.0) == doctest::Approx(1.125));

    // time ratio e with acc_d = 0.1: denominator 1.1
    CHECK(arr_score(0.9, 0.8, std::exp(1.0), 1.0, 0.1) == doctest::Approx(1.125 / 1.1));
}

TEST_CASE("arr_score clamps a non-positive denominator") {
    bool clamped = false;
    double v = arr_score(1.0, 1.0, 1e-9, 1e9, 1.0, &clamped);
    CHECK(clamped);
    CHECK(v > 0.0);
}

TEST_CASE("arr reciprocal identity at acc_d = 0") {
    Rng rng(4);
    for (int i = 0; i < 50; ++i) {
        double pp = 0.1 + rng.uniform(), pq = 0.1 + rng.uniform();
        double tp = 0.1 + rng.uniform() * 10, tq = 0.1 + rng.uniform() * 10;
        CHECK(arr_score(pp, pq, tp, tq, 0.0) * arr_score(pq, pp, tq, tp, 0.0) ==
              doctest::Approx(1.0));
    }
}

TEST_CASE("knn with one identical neighbor ranks by single-dataset ARR") {
    std::vector<RunRecord> recs = {rec("d1", "fast", 0.9, 1.0), rec("d1", "slow", 0.9, 8.0),
                                   rec("d1", "weak", 0.5, 1.0), rec("d2", "fast", 0.4, 1.0),
                                   rec("d2", "slow", 0.9, 8.0), rec("d2", "weak", 0.9, 1.0)};
    eval::Corpus corpus = eval::Corpus::build(std::move(recs));
    meta::MetaFeatureTable meta;
    meta.feature_names = {"f1", "f2"};
    meta.rows["d1"] = {0.0, 1.0};
    meta.rows["d2"] = {5.0, -1.0};

    ArrParams params{1, 0.1, 3};
    // query identical to d1: neighbor set = {d1}
    auto ranked = knn_rank(corpus, meta, {0.0, 1.0}, params);
    REQUIRE(ranked.size() == 3);

    // direct single-dataset ARR computation on d1
    auto mean_arr = [&](double p, double t, double p1, double t1, double p2, double t2) {
        return (arr_score(p, p1, t, t1, 0.1) + arr_score(p, p2, t, t2, 0.1)) / 2.0;
    };
    double s_fast = mean_arr(0.9, 1.0, 0.9, 8.0, 0.5, 1.0);
    double s_slow = mean_arr(0.9, 8.0, 0.9, 1.0, 0.5, 1.0);
    double s_weak = mean_arr(0.5, 1.0, 0.9, 1.0, 0.9, 8.0);
    REQUIRE(s_fast > s_slow);
    REQUIRE(s_slow > s_weak);
    CHECK(ranked[0] == "fast");
    CHECK(ranked[1] == "slow");
    CHECK(ranked[2] == "weak");
}

TEST_CASE("knn keeps everything when top_m covers all configs") {
    std::vector<RunRecord> recs = {rec("d1", "a", 0.9, 1.0), rec("d1", "b", 0.8, 2.0)};
    eval::Corpus corpus = eval::Corpus::build(std::move(recs));
    meta::MetaFeatureTable meta;
    meta.feature_names = {"f"};
    meta.rows["d1"] = {0.5};
    auto kept = knn_recommend(corpus, meta, {0.5}, {1, 0.01, 10});
    CHECK(kept == std::set<std::string>{"a", "b"});
}

TEST_CASE("faster config outranks an equal-performance slower one") {
    std::vector<RunRecord> recs;
    for (int d = 0; d < 3; ++d) {
        std::string id = "d" + std::to_string(d);
        recs.push_back(rec(id, "quick", 0.9, 1.0));
        recs.push_back(rec(id, "slow", 0.9, 2.0));
        recs.push_back(rec(id, "other", 0.7, 1.5));
    }
    eval::Corpus corpus = eval::Corpus::build(std::move(recs));
    meta::MetaFeatureTable meta;
    meta.feature_names = {"f"};
    meta.rows["d0"] = {0.0};
    meta.rows["d1"] = {1.0};
    meta.rows["d2"] = {2.0};
    for (double accd : {0.001, 0.01, 0.1}) {
        auto ranked = knn_rank(corpus, meta, {1.0}, {3, accd, 1});
        CHECK(ranked[0] == "quick");
    }
}

TEST_CASE("knn with acc_d = 0 matches mean performance-ratio ranking") {
    Rng rng(77);
    std::vector<RunRecord> recs;
    int n_cfg = 5;
    for (int d = 0; d < 4; ++d)
        for (int c = 0; c < n_cfg; ++c)
            recs.push_back(rec("d" + std::to_string(d), "c" + std::to_string(c),
                               0.1 + rng.uniform(), 0.1 + rng.uniform() * 5));
    eval::Corpus corpus = eval::Corpus::build(std::move(recs));
    meta::MetaFeatureTable meta;
    meta.feature_names = {"f"};
    for (int d = 0; d < 4; ++d) meta.rows["d" + std::to_string(d)] = {static_cast<double>(d)};

    auto ranked = knn_rank(corpus, meta, {1.0}, {1, 0.0, 1});
    // neighbor = d1; rank by mean pairwise performance ratio on d1
    std::vector<std::pair<double, std::string>> expected;
    const auto& rs = corpus.by_dataset.at("d1");
    for (const RunRecord* p : rs) {
        double sum = 0.0;
        for (const RunRecord* q : rs)
            if (q != p) sum += p->performance / q->performance;
        expected.emplace_back(-sum / (n_cfg - 1), p->config_id);
    }
    std::sort(expected.begin(), expected.end());
    for (int i = 0; i < n_cfg; ++i) CHECK(ranked[i] == expected[i].second);
}

TEST_CASE("configs absent on every neighbor rank last") {
    std::vector<RunRecord> recs = {rec("d1", "a", 0.9, 1.0), rec("d1", "b", 0.8, 2.0),
                                   rec("d2", "zz", 1.0, 1.0)};
    eval::Corpus corpus = eval::Corpus::build(std::move(recs));
    meta::MetaFeatureTable meta;
    meta.feature_names = {"f"};
    meta.rows["d1"] = {0.0};
    meta.rows["d2"] = {10.0};
    auto ranked = knn_rank(corpus, meta, {0.0}, {1, 0.01, 3});
    CHECK(ranked.back() == "zz");
}
