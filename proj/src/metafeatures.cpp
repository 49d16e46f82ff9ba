#include "shsr/metafeatures.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "shsr/csv.hpp"
#include "shsr/rng.hpp"

namespace shsr::meta {

const std::array<std::string, kNumMetaFeatures>& meta_feature_names() {
    static const std::array<std::string, kNumMetaFeatures> names = {
        "n_samples",
        "n_features",
        "samples_to_features",
        "total_missing",
        "total_missing_f",
        "samples_with_any_missing",
        "samples_with_any_missing_f",
        "categorical_features",
        "numerical_features",
        "target_majority_class_instances",
        "target_majority_class_f",
        "target_minority_class_instances",
        "target_minority_class_f",
        "categorical_to_numerical",
        "silhouette_2",
        "silhouette_3",
        "silhouette_4",
        "silhouette_5",
        "silhouette_6",
        "silhouette_7",
        "silhouette_8",
        "silhouette_9",
        "silhouette_10",
        "pca_60",
        "pca_70",
        "pca_80",
        "pca_90",
    };
    return names;
}

namespace {

std::size_t name_index(const std::string& name) {
    const auto& names = meta_feature_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw DataError("unknown meta-feature: " + name);
    return static_cast<std::size_t>(it - names.begin());
}

bool cell_missing_num(const Column& c, std::size_t i) {
    return c.kind == ColumnKind::Numerical ? is_missing(c.num[i]) : c.cat[i].empty();
}

}  // namespace

double& MetaFeatureVector::operator[](const std::string& name) { return values[name_index(name)]; }
double MetaFeatureVector::at(const std::string& name) const { return values[name_index(name)]; }

kernels::Points encode_dataset(const TabularDataset& ds) {
    const std::size_t n = ds.n_rows;
    std::vector<std::vector<double>> cols;

    for (const auto& c : ds.features) {
        if (c.kind == ColumnKind::Numerical) {
            double sum = 0.0;
            std::size_t cnt = 0;
            for (double v : c.num)
                if (!is_missing(v)) {
                    sum += v;
                    ++cnt;
                }
            double mean = cnt ? sum / static_cast<double>(cnt) : 0.0;
            std::vector<double> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = is_missing(c.num[i]) ? mean : c.num[i];
            cols.push_back(std::move(col));
        } else {
            // mode imputation, then one column per category
            std::map<std::string, std::size_t> counts;
            for (const auto& v : c.cat)
                if (!v.empty()) ++counts[v];
            std::string mode;
            std::size_t best = 0;
            for (const auto& [v, cnt] : counts)
                if (cnt > best) {
                    best = cnt;
                    mode = v;
                }
            std::set<std::string> levels;
            for (const auto& v : c.cat) levels.insert(v.empty() ? mode : v);
            for (const auto& lvl : levels) {
                std::vector<double> col(n);
                for (std::size_t i = 0; i < n; ++i)
                    col[i] = (c.cat[i].empty() ? mode : c.cat[i]) == lvl ? 1.0 : 0.0;
                cols.push_back(std::move(col));
            }
        }
    }

    // z-score; drop zero-variance columns
    kernels::Points pts;
    pts.n = n;
    std::vector<std::vector<double>> kept;
    for (auto& col : cols) {
        double mean = std::accumulate(col.begin(), col.end(), 0.0) / static_cast<double>(n);
        double var = 0.0;
        for (double v : col) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        if (var <= 0.0) continue;
        double sd = std::sqrt(var);
        for (double& v : col) v = (v - mean) / sd;
        kept.push_back(std::move(col));
    }
    pts.dim = kept.size();
    pts.data.resize(pts.n * pts.dim);
    for (std::size_t i = 0; i < pts.n; ++i)
        for (std::size_t j = 0; j < pts.dim; ++j) pts.data[i * pts.dim + j] = kept[j][i];
    return pts;
}

MetaFeatureVector extract_simple(const TabularDataset& ds) {
    MetaFeatureVector v;
    const std::size_t n = ds.n_rows;
    const std::size_t f = ds.features.size();

    v["n_samples"] = static_cast<double>(n);
    v["n_features"] = static_cast<double>(f);
    if (f > 0) v["samples_to_features"] = static_cast<double>(n) / static_cast<double>(f);

    std::size_t total_missing = 0, rows_with_missing = 0;
    for (std::size_t i = 0; i < n; ++i) {
        bool any = false;
        for (const auto& c : ds.features) {
            if (cell_missing_num(c, i)) {
                ++total_missing;
                any = true;
            }
        }
        if (any) ++rows_with_missing;
    }
    v["total_missing"] = static_cast<double>(total_missing);
    if (n * f > 0) v["total_missing_f"] = static_cast<double>(total_missing) / static_cast<double>(n * f);
    v["samples_with_any_missing"] = static_cast<double>(rows_with_missing);
    if (n > 0)
        v["samples_with_any_missing_f"] = static_cast<double>(rows_with_missing) / static_cast<double>(n);

    std::size_t n_cat = 0, n_num = 0;
    for (const auto& c : ds.features) (c.kind == ColumnKind::Categorical ? n_cat : n_num)++;
    v["categorical_features"] = static_cast<double>(n_cat);
    v["numerical_features"] = static_cast<double>(n_num);
    // denominator clamped to 1 when there are no numerical features
    v["categorical_to_numerical"] =
        static_cast<double>(n_cat) / static_cast<double>(std::max<std::size_t>(n_num, 1));

    if (ds.task == TaskKind::BinaryClassification && ds.target) {
        std::map<std::string, std::size_t> counts;
        const Column& t = *ds.target;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t.kind == ColumnKind::Categorical) {
                if (!t.cat[i].empty()) ++counts[t.cat[i]];
            } else if (!is_missing(t.num[i])) {
                std::ostringstream key;
                key << t.num[i];
                ++counts[key.str()];
            }
        }
        if (!counts.empty()) {
            std::size_t total = 0, majority = 0, minority = std::numeric_limits<std::size_t>::max();
            for (const auto& [lbl, cnt] : counts) {
                total += cnt;
                majority = std::max(majority, cnt);
                minority = std::min(minority, cnt);
            }
            if (counts.size() == 1) minority = 0;
            v["target_majority_class_instances"] = static_cast<double>(majority);
            v["target_majority_class_f"] = static_cast<double>(majority) / static_cast<double>(total);
            v["target_minority_class_instances"] = static_cast<double>(minority);
            v["target_minority_class_f"] = static_cast<double>(minority) / static_cast<double>(total);
        }
    }
    return v;
}

double silhouette_index(const kernels::Points& encoded, int k, std::uint64_t seed,
                        kernels::Exec exec) {
    if (encoded.n == 0 || k < 2) return kMissing;
    // count distinct rows
    std::set<std::vector<double>> distinct;
    for (std::size_t i = 0; i < encoded.n; ++i)
        distinct.insert(std::vector<double>(encoded.row(i), encoded.row(i) + encoded.dim));
    if (static_cast<std::size_t>(k) > distinct.size()) {
        if (distinct.size() == 1) return 0.0;  // identical rows: zero-denominator convention
        return kMissing;
    }
    if (encoded.dim == 0) return 0.0;
    kernels::KMeansResult km = kernels::kmeans(encoded, k, seed, 10, 100, exec);
    return kernels::silhouette(encoded, km.assignment, k, exec);
}

double silhouette_index(const TabularDataset& ds, int k, std::uint64_t seed, kernels::Exec exec) {
    return silhouette_index(encode_dataset(ds), k, seed, exec);
}

int pca_component_count(const kernels::Points& encoded, int percent) {
    if (encoded.n < 2 || encoded.dim == 0) return 1;
    const std::size_t n = encoded.n, dim = encoded.dim;
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(
        encoded.data.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
    Eigen::MatrixXd centered = M.rowwise() - M.colwise().mean();
    Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    std::vector<double> eig(solver.eigenvalues().data(),
                            solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(eig.rbegin(), eig.rend());
    double total = 0.0;
    for (double e : eig) total += std::max(e, 0.0);
    if (total <= 0.0) return 1;
    double cum = 0.0;
    double need = static_cast<double>(percent) / 100.0;
    for (std::size_t m = 0; m < eig.size(); ++m) {
        cum += std::max(eig[m], 0.0) / total;
        if (cum >= need - 1e-12) return static_cast<int>(m + 1);
    }
    return static_cast<int>(eig.size());
}

int pca_component_count(const TabularDataset& ds, int percent) {
    return pca_component_count(encode_dataset(ds), percent);
}

namespace {

kernels::Points subsample_rows(const kernels::Points& pts, std::size_t cap, std::uint64_t seed) {
    if (pts.n <= cap) return pts;
    std::vector<std::size_t> idx(pts.n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    kernels::Points out;
    out.n = cap;
    out.dim = pts.dim;
    out.data.resize(cap * pts.dim);
    for (std::size_t i = 0; i < cap; ++i)
        std::copy_n(pts.row(idx[i]), pts.dim, out.data.begin() + i * pts.dim);
    return out;
}

}  // namespace

MetaFeatureVector extract_all(const TabularDataset& ds, std::uint64_t seed, kernels::Exec exec) {
    MetaFeatureVector v = extract_simple(ds);
    kernels::Points encoded = encode_dataset(ds);
    kernels::Points sil_pts = subsample_rows(encoded, 1000, derive_seed(seed, 0x5ab5a3bULL));
    for (int k = 2; k <= 10; ++k)
        v["silhouette_" + std::to_string(k)] =
            silhouette_index(sil_pts, k, derive_seed(seed, 1, static_cast<std::uint64_t>(k)), exec);
    for (int p : {60, 70, 80, 90})
        v["pca_" + std::to_string(p)] = static_cast<double>(pca_component_count(encoded, p));
    return v;
}

const std::vector<double>& MetaFeatureTable::row(const std::string& dataset_id) const {
    auto it = rows.find(dataset_id);
    if (it == rows.end()) throw DataError("no meta-features for dataset: " + dataset_id);
    return it->second;
}

MetaFeatureTable load_meta_table(std::istream& in) {
    std::vector<std::string> row;
    if (!csv::read_row(in, row) || row.empty() || row[0] != "dataset_id")
        throw FormatError("meta-feature CSV must start with a dataset_id column");
    MetaFeatureTable t;
    t.feature_names.assign(row.begin() + 1, row.end());
    while (csv::read_row(in, row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != t.feature_names.size() + 1)
            throw FormatError("meta-feature CSV row width mismatch for '" + row[0] + "'");
        std::vector<double> vals(t.feature_names.size(), kMissing);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const std::string& s = row[i + 1];
            if (s.empty()) continue;
            double x = 0.0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
            if (ec != std::errc() || p != s.data() + s.size())
                throw FormatError("bad meta-feature value: '" + s + "'");
            vals[i] = x;
        }
        t.rows[row[0]] = std::move(vals);
    }
    return t;
}

void save_meta_table(std::ostream& out, const MetaFeatureTable& table) {
    std::vector<std::string> header = {"dataset_id"};
    header.insert(header.end(), table.feature_names.begin(), table.feature_names.end());
    csv::write_row(out, header);
    for (const auto& [id, vals] : table.rows) {
        std::vector<std::string> row = {id};
        for (double v : vals) {
            if (is_missing(v)) {
                row.emplace_back();
            } else {
                std::ostringstream os;
                os.precision(17);
                os << v;
                row.push_back(os.str());
            }
        }
        csv::write_row(out, row);
    }
}

TabularDataset load_tabular_csv(std::istream& in, const std::optional<std::string>& target_column,
                                TaskKind task) {
    std::vector<std::string> header;
    if (!csv::read_row(in, header) || header.empty())
        throw FormatError("empty dataset CSV");
    std::vector<std::vector<std::string>> raw(header.size());
    std::vector<std::string> row;
    while (csv::read_row(in, row)) {
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != header.size()) throw FormatError("dataset CSV row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) raw[i].push_back(row[i]);
    }

    auto is_na = [](const std::string& s) { return s.empty() || s == "NA" || s == "?"; };
    TabularDataset ds;
    ds.task = task;
    ds.n_rows = raw.empty() ? 0 : raw[0].size();
    for (std::size_t ci = 0; ci < header.size(); ++ci) {
        Column c;
        c.name = header[ci];
        bool numeric = true;
        std::vector<double> nums;
        nums.reserve(raw[ci].size());
        for (const auto& s : raw[ci]) {
            if (is_na(s)) {
                nums.push_back(kMissing);
                continue;
            }
            double x = 0.0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
            if (ec != std::errc() || p != s.data() + s.size()) {
                numeric = false;
                break;
            }
            nums.push_back(x);
        }
        if (numeric) {
            c.kind = ColumnKind::Numerical;
            c.num = std::move(nums);
        } else {
            c.kind = ColumnKind::Categorical;
            c.cat.reserve(raw[ci].size());
            for (const auto& s : raw[ci]) c.cat.push_back(is_na(s) ? "" : s);
        }
        if (target_column && c.name == *target_column)
            ds.target = std::move(c);
        else
            ds.features.push_back(std::move(c));
    }
    if (target_column && !ds.target)
        throw FormatError("target column not found: " + *target_column);
    return ds;
}

}  // namespace shsr::meta
