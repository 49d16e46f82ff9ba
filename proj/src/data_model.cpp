#include "shsr/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "shsr/csv.hpp"

namespace shsr {

GroupCatalog GroupCatalog::from_records(const std::vector<RunRecord>& records) {
    GroupCatalog cat;
    std::set<std::string> seen;
    for (const auto& r : records) {
        for (const auto& g : r.group_ids) seen.insert(g);
        auto& member = cat.membership_[r.config_id];
        member.insert(r.group_ids.begin(), r.group_ids.end());
    }
    cat.groups_.assign(seen.begin(), seen.end());  // std::set iterates sorted
    for (std::size_t i = 0; i < cat.groups_.size(); ++i) cat.index_[cat.groups_[i]] = i;
    return cat;
}

std::size_t GroupCatalog::index_of(const std::string& group_id) const {
    auto it = index_.find(group_id);
    if (it == index_.end()) throw DataError("unknown group: " + group_id);
    return it->second;
}

GroupDatasetMatrix::GroupDatasetMatrix(std::vector<std::string> row_ids,
                                       std::vector<std::string> col_ids)
    : row_ids_(std::move(row_ids)),
      col_ids_(std::move(col_ids)),
      values_(row_ids_.size() * col_ids_.size(), kMissing) {}

std::size_t GroupDatasetMatrix::col_index(const std::string& dataset_id) const {
    auto it = std::lower_bound(col_ids_.begin(), col_ids_.end(), dataset_id);
    if (it == col_ids_.end() || *it != dataset_id)
        throw DataError("unknown dataset: " + dataset_id);
    return static_cast<std::size_t>(it - col_ids_.begin());
}

namespace {

double parse_real(const std::string& s, const std::string& what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw FormatError("unparseable " + what + ": '" + s + "'");
    return v;
}

}  // namespace

std::vector<RunRecord> load_run_records(std::istream& in) {
    static const std::vector<std::string> kHeader = {
        "dataset_id", "config_id", "group_ids", "performance", "time_seconds", "shared_cost_id"};

    std::vector<std::string> row;
    if (!csv::read_row(in, row)) throw FormatError("empty run-record stream");
    if (row != kHeader) {
        for (const auto& col : row) {
            if (std::find(kHeader.begin(), kHeader.end(), col) == kHeader.end())
                throw FormatError("unknown column: " + col);
        }
        throw FormatError("bad run-record header");
    }

    std::vector<RunRecord> records;
    std::set<std::pair<std::string, std::string>> keys;
    std::size_t line = 1;
    while (csv::read_row(in, row)) {
        ++line;
        if (row.size() == 1 && row[0].empty()) continue;  // trailing blank line
        if (row.size() != kHeader.size())
            throw FormatError("line " + std::to_string(line) + ": expected 6 fields, got " +
                              std::to_string(row.size()));
        RunRecord r;
        r.dataset_id = row[0];
        r.config_id = row[1];
        std::stringstream groups(row[2]);
        std::string g;
        while (std::getline(groups, g, ';'))
            if (!g.empty()) r.group_ids.insert(g);
        if (r.group_ids.empty())
            throw FormatError("line " + std::to_string(line) + ": empty group_ids");
        r.performance = parse_real(row[3], "performance");
        r.time_seconds = parse_real(row[4], "time_seconds");
        if (!row[5].empty()) r.shared_cost_id = row[5];

        if (r.performance <= 0.0)
            throw InvalidValue("line " + std::to_string(line) + ": performance must be > 0");
        if (r.time_seconds < 0.0)
            throw InvalidValue("line " + std::to_string(line) + ": time_seconds must be >= 0");
        if (!keys.insert({r.dataset_id, r.config_id}).second)
            throw DuplicateRecord("duplicate record: (" + r.dataset_id + ", " + r.config_id + ")");
        records.push_back(std::move(r));
    }
    return records;
}

Matrices build_matrices(const std::vector<RunRecord>& records, const GroupCatalog& catalog,
                        bool dedup_shared_cost) {
    std::set<std::string> dataset_set;
    for (const auto& r : records) dataset_set.insert(r.dataset_id);
    std::vector<std::string> datasets(dataset_set.begin(), dataset_set.end());

    Matrices m{RatioMatrix(catalog.groups(), datasets), TimeMatrix(catalog.groups(), datasets)};

    // per-dataset overall best
    std::vector<double> best(datasets.size(), 0.0);
    for (const auto& r : records) {
        std::size_t d = m.performance.col_index(r.dataset_id);
        best[d] = std::max(best[d], r.performance);
    }

    // Per-cell accumulators. A shared_cost_id is counted once per (g,d)
    // cell; max over its records keeps the sum order-invariant.
    std::vector<std::map<std::string, double>> shared(catalog.groups().size() * datasets.size());
    for (const auto& r : records) {
        std::size_t d = m.performance.col_index(r.dataset_id);
        for (const auto& gid : r.group_ids) {
            std::size_t g = catalog.index_of(gid);
            double& p = m.performance.at(g, d);
            double ratio = r.performance / best[d];
            p = is_missing(p) ? ratio : std::max(p, ratio);

            double& e = m.time.at(g, d);
            if (is_missing(e)) e = 0.0;
            if (dedup_shared_cost && r.shared_cost_id) {
                double& t = shared[g * datasets.size() + d][*r.shared_cost_id];
                t = std::max(t, r.time_seconds);
            } else {
                e += r.time_seconds;
            }
        }
    }
    for (std::size_t g = 0; g < m.time.rows(); ++g)
        for (std::size_t d = 0; d < m.time.cols(); ++d)
            for (const auto& [id, t] : shared[g * datasets.size() + d]) m.time.at(g, d) += t;
    return m;
}

ActiveSets init_active(const RatioMatrix& performance) {
    ActiveSets active(performance.rows());
    for (std::size_t g = 0; g < performance.rows(); ++g)
        for (std::size_t d = 0; d < performance.cols(); ++d)
            if (performance.present(g, d)) active[g].insert(d);
    return active;
}

}  // namespace shsr
