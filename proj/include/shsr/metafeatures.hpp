#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "shsr/data_model.hpp"
#include "shsr/kernels.hpp"

namespace shsr::meta {

enum class ColumnKind { Numerical, Categorical };
enum class TaskKind { None, BinaryClassification, Regression };

struct Column {
    std::string name;
    ColumnKind kind = ColumnKind::Numerical;
    std::vector<double> num;       // NaN = missing
    std::vector<std::string> cat;  // "" = missing
    std::size_t size() const { return kind == ColumnKind::Numerical ? num.size() : cat.size(); }
};

struct TabularDataset {
    std::vector<Column> features;
    std::optional<Column> target;
    TaskKind task = TaskKind::None;
    std::size_t n_rows = 0;
};

constexpr std::size_t kNumMetaFeatures = 27;

// The 27 meta-feature names in canonical column order:
// 14 simple measures, silhouette_2..silhouette_10, pca_60..pca_90.
const std::array<std::string, kNumMetaFeatures>& meta_feature_names();

struct MetaFeatureVector {
    std::array<double, kNumMetaFeatures> values;  // NaN = missing

    MetaFeatureVector() { values.fill(kMissing); }
    double& operator[](const std::string& name);
    double at(const std::string& name) const;
};

// Preprocessed matrix for silhouette/PCA: mean-imputed numericals,
// mode-imputed one-hot categoricals, z-scored, zero-variance columns
// dropped. Target column excluded.
kernels::Points encode_dataset(const TabularDataset& ds);

// the 14 simple measures; class measures only for binary targets
MetaFeatureVector extract_simple(const TabularDataset& ds);

// mean silhouette of k-means with 10 restarts; missing (NaN) when k
// exceeds the number of distinct preprocessed rows
double silhouette_index(const TabularDataset& ds, int k, std::uint64_t seed,
                        kernels::Exec exec = kernels::Exec::Parallel);
double silhouette_index(const kernels::Points& encoded, int k, std::uint64_t seed,
                        kernels::Exec exec = kernels::Exec::Parallel);

// minimal number of principal components explaining p% of variance
int pca_component_count(const TabularDataset& ds, int percent);
int pca_component_count(const kernels::Points& encoded, int percent);

// all 27; rows subsampled (seeded, without replacement) to <= 1000 for
// the silhouette computations only
MetaFeatureVector extract_all(const TabularDataset& ds, std::uint64_t seed,
                              kernels::Exec exec = kernels::Exec::Parallel);

// F x D meta-feature table keyed by dataset id
struct MetaFeatureTable {
    std::vector<std::string> feature_names;
    std::map<std::string, std::vector<double>> rows;  // NaN = missing

    const std::vector<double>& row(const std::string& dataset_id) const;
};

// CSV: `dataset_id` + named feature columns; empty cell = missing
MetaFeatureTable load_meta_table(std::istream& in);
void save_meta_table(std::ostream& out, const MetaFeatureTable& table);

// Tabular dataset CSV: header row; a column is numerical when every
// non-missing cell parses as a real. Missing cells are empty, "NA" or "?".
TabularDataset load_tabular_csv(std::istream& in, const std::optional<std::string>& target_column,
                                TaskKind task);

}  // namespace shsr::meta
