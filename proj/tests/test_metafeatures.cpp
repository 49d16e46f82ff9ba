#include <doctest.h>

#include <cmath>
#include <sstream>

#include "shsr/metafeatures.hpp"

using namespace shsr;
using namespace shsr::meta;

namespace {

Column num_col(const std::string& name, std::vector<double> v) {
    Column c;
    c.name = name;
    c.kind = ColumnKind::Numerical;
    c.num = std::move(v);
    return c;
}

Column cat_col(const std::string& name, std::vector<std::string> v) {
    Column c;
    c.name = name;
    c.kind = ColumnKind::Categorical;
    c.cat = std::move(v);
    return c;
}

}  // namespace

TEST_CASE("simple measures count missingness") {
    TabularDataset ds;
    ds.n_rows = 4;
    ds.features = {num_col("a", {1, 2, 3, 4}), num_col("b", {1, kMissing, 3, 4}),
                   num_col("c", {1, 2, 3, 4})};
    auto v = extract_simple(ds);
    CHECK(v.at("n_samples") == 4);
    CHECK(v.at("n_features") == 3);
    CHECK(v.at("total_missing") == 1);
    CHECK(v.at("total_missing_f") == doctest::Approx(1.0 / 12));
    CHECK(v.at("samples_with_any_missing") == 1);
    CHECK(v.at("samples_with_any_missing_f") == doctest::Approx(0.25));
}

TEST_CASE("simple measures handle binary targets") {
    TabularDataset ds;
    ds.n_rows = 4;
    ds.task = TaskKind::BinaryClassification;
    ds.features = {num_col("a", {1, 2, 3, 4})};
    ds.target = cat_col("y", {"+", "+", "+", "-"});
    auto v = extract_simple(ds);
    CHECK(v.at("target_majority_class_instances") == 3);
    CHECK(v.at("target_majority_class_f") == doctest::Approx(0.75));
    CHECK(v.at("target_minority_class_instances") == 1);
    CHECK(v.at("target_minority_class_f") == doctest::Approx(0.25));
}

TEST_CASE("class measures are missing for regression tasks") {
    TabularDataset ds;
    ds.n_rows = 3;
    ds.task = TaskKind::Regression;
    ds.features = {num_col("a", {1, 2, 3})};
    ds.target = num_col("y", {0.5, 0.2, 0.9});
    auto v = extract_simple(ds);
    CHECK(is_missing(v.at("target_majority_class_instances")));
    CHECK(is_missing(v.at("target_majority_class_f")));
    CHECK(is_missing(v.at("target_minority_class_instances")));
    CHECK(is_missing(v.at("target_minority_class_f")));
}

TEST_CASE("feature-kind ratios") {
    TabularDataset ds;
    ds.n_rows = 2;
    ds.features = {cat_col("c1", {"a", "b"}), cat_col("c2", {"a", "b"}),
                   num_col("n1", {1, 2}), num_col("n2", {1, 2}), num_col("n3", {1, 2}),
                   num_col("n4", {1, 2})};
    auto v = extract_simple(ds);
    CHECK(v.at("categorical_features") == 2);
    CHECK(v.at("numerical_features") == 4);
    CHECK(v.at("categorical_to_numerical") == doctest::Approx(0.5));

    TabularDataset all_cat;
    all_cat.n_rows = 2;
    all_cat.features = {cat_col("c1", {"a", "b"}), cat_col("c2", {"a", "b"}),
                        cat_col("c3", {"a", "b"})};
    auto v2 = extract_simple(all_cat);
    // zero numerical features: denominator clamps to 1
    CHECK(v2.at("categorical_to_numerical") == doctest::Approx(3.0));
}

TEST_CASE("samples_to_features for 100x4 data") {
    TabularDataset ds;
    ds.n_rows = 100;
    std::vector<double> col(100, 1.0);
    for (int i = 0; i < 4; ++i) ds.features.push_back(num_col("f" + std::to_string(i), col));
    auto v = extract_simple(ds);
    CHECK(v.at("samples_to_features") == doctest::Approx(25.0));
}

TEST_CASE("silhouette index of the two-blob line") {
    TabularDataset ds;
    ds.n_rows = 4;
    ds.features = {num_col("x", {0, 1, 100, 101})};
    double s = silhouette_index(ds, 2, 7);
    double expected = (99.5 / 100.5 + 98.5 / 99.5) / 2.0;
    CHECK(s == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("silhouette with identical rows is zero by convention") {
    TabularDataset ds;
    ds.n_rows = 5;
    ds.features = {num_col("x", {2, 2, 2, 2, 2})};
    CHECK(silhouette_index(ds, 2, 1) == 0.0);
}

TEST_CASE("silhouette is missing when k exceeds distinct rows") {
    TabularDataset ds;
    ds.n_rows = 4;
    ds.features = {num_col("x", {1, 1, 2, 2})};
    CHECK(is_missing(silhouette_index(ds, 3, 1)));
}

TEST_CASE("pca counts one component for rank-1 data") {
    TabularDataset ds;
    ds.n_rows = 5;
    ds.features = {num_col("a", {1, 2, 3, 4, 5}), num_col("b", {2, 4, 6, 8, 10}),
                   num_col("c", {-1, -2, -3, -4, -5})};
    for (int p : {60, 70, 80, 90}) CHECK(pca_component_count(ds, p) == 1);
}

TEST_CASE("pca on independent equal-variance dimensions") {
    // two orthogonal directions with equal variance: ratios (0.5, 0.5)
    TabularDataset ds2;
    ds2.n_rows = 4;
    ds2.features = {num_col("a", {1, 1, -1, -1}), num_col("b", {1, -1, 1, -1})};
    CHECK(pca_component_count(ds2, 60) == 2);
    CHECK(pca_component_count(ds2, 90) == 2);

    // three equal-variance dimensions: cumulative 1/3, 2/3, 1
    TabularDataset ds3;
    ds3.n_rows = 8;
    std::vector<double> a, b, c;
    for (int i = 0; i < 8; ++i) {
        a.push_back(i & 1 ? 1 : -1);
        b.push_back(i & 2 ? 1 : -1);
        c.push_back(i & 4 ? 1 : -1);
    }
    ds3.features = {num_col("a", a), num_col("b", b), num_col("c", c)};
    CHECK(pca_component_count(ds3, 60) == 2);
}

TEST_CASE("pca_p is non-decreasing in p and bounded by rank") {
    TabularDataset ds;
    ds.n_rows = 12;
    std::vector<double> a, b, c;
    for (int i = 0; i < 12; ++i) {
        a.push_back(i * 1.0);
        b.push_back((i % 3) * 2.0);
        c.push_back(i * 1.0 + (i % 3));  // linear combination of a and b
    }
    ds.features = {num_col("a", a), num_col("b", b), num_col("c", c)};
    int prev = 0;
    for (int p : {60, 70, 80, 90}) {
        int m = pca_component_count(ds, p);
        CHECK(m >= prev);
        CHECK(m <= 2);  // rank of the encoded matrix
        prev = m;
    }
}

TEST_CASE("extract_all produces all 27 entries deterministically") {
    TabularDataset ds;
    ds.n_rows = 30;
    std::vector<double> a, b;
    std::vector<std::string> c;
    for (int i = 0; i < 30; ++i) {
        a.push_back(std::sin(i * 1.7) * 3);
        b.push_back(i % 5);
        c.push_back(i % 2 ? "u" : "v");
    }
    ds.features = {num_col("a", a), num_col("b", b), cat_col("c", c)};
    ds.task = TaskKind::Regression;

    auto v1 = extract_all(ds, 11);
    auto v2 = extract_all(ds, 11);
    for (std::size_t i = 0; i < kNumMetaFeatures; ++i) {
        bool both_missing = is_missing(v1.values[i]) && is_missing(v2.values[i]);
        CHECK((both_missing || v1.values[i] == v2.values[i]));
    }
    // regression task: the 4 class-based entries are missing
    CHECK(is_missing(v1.at("target_majority_class_instances")));
    CHECK(is_missing(v1.at("target_majority_class_f")));
    CHECK(is_missing(v1.at("target_minority_class_instances")));
    CHECK(is_missing(v1.at("target_minority_class_f")));
    // silhouettes within bounds
    for (int k = 2; k <= 10; ++k) {
        double s = v1.at("silhouette_" + std::to_string(k));
        if (!is_missing(s)) {
            CHECK(s >= -1.0);
            CHECK(s <= 1.0);
        }
    }
}

TEST_CASE("meta table CSV round-trips") {
    MetaFeatureTable t;
    t.feature_names = {"f1", "f2"};
    t.rows["d1"] = {1.5, kMissing};
    t.rows["d2"] = {-0.25, 3.0};
    std::ostringstream os;
    save_meta_table(os, t);
    std::istringstream is(os.str());
    auto t2 = load_meta_table(is);
    CHECK(t2.feature_names == t.feature_names);
    CHECK(t2.rows.at("d1")[0] == 1.5);
    CHECK(is_missing(t2.rows.at("d1")[1]));
    CHECK(t2.rows.at("d2")[1] == 3.0);
}

TEST_CASE("tabular CSV loader infers kinds and missing cells") {
    std::istringstream in(
        "x,color,y\n"
        "1.5,red,0\n"
        ",blue,1\n"
        "3.5,?,0\n");
    auto ds = load_tabular_csv(in, std::string("y"), TaskKind::BinaryClassification);
    REQUIRE(ds.features.size() == 2);
    CHECK(ds.features[0].kind == ColumnKind::Numerical);
    CHECK(is_missing(ds.features[0].num[1]));
    CHECK(ds.features[1].kind == ColumnKind::Categorical);
    CHECK(ds.features[1].cat[2] == "");
    REQUIRE(ds.target.has_value());
    CHECK(ds.n_rows == 3);
}
