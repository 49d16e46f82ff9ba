#pragma once

#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace shsr {

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DuplicateRecord : DataError {
    using DataError::DataError;
};
struct InvalidValue : DataError {
    using DataError::DataError;
};
struct FormatError : DataError {
    using DataError::DataError;
};

// One (dataset, configuration) result from an AutoML run.
// performance is positive, higher-is-better; group_ids may overlap
// across records; shared_cost_id marks a computation (typically feature
// selection) whose time is recorded identically on several records.
struct RunRecord {
    std::string dataset_id;
    std::string config_id;
    std::set<std::string> group_ids;
    double performance = 0.0;
    double time_seconds = 0.0;
    std::optional<std::string> shared_cost_id;
};

// Fixed lexicographic group order; all downstream tie-breaks use it.
class GroupCatalog {
public:
    static GroupCatalog from_records(const std::vector<RunRecord>& records);

    const std::vector<std::string>& groups() const { return groups_; }
    std::size_t index_of(const std::string& group_id) const;
    bool has_group(const std::string& group_id) const { return index_.count(group_id) > 0; }

    // config -> groups it belongs to
    const std::map<std::string, std::set<std::string>>& membership() const { return membership_; }

private:
    std::vector<std::string> groups_;
    std::map<std::string, std::size_t> index_;
    std::map<std::string, std::set<std::string>> membership_;
};

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

// Dense G x D matrix with NaN as the missing marker. Rows are groups in
// catalog order, columns are datasets in lexicographic order.
class GroupDatasetMatrix {
public:
    GroupDatasetMatrix() = default;
    GroupDatasetMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids);

    double at(std::size_t g, std::size_t d) const { return values_[g * cols() + d]; }
    double& at(std::size_t g, std::size_t d) { return values_[g * cols() + d]; }
    bool present(std::size_t g, std::size_t d) const { return !is_missing(at(g, d)); }

    std::size_t rows() const { return row_ids_.size(); }
    std::size_t cols() const { return col_ids_.size(); }
    const std::vector<std::string>& row_ids() const { return row_ids_; }
    const std::vector<std::string>& col_ids() const { return col_ids_; }
    std::size_t col_index(const std::string& dataset_id) const;

private:
    std::vector<std::string> row_ids_;
    std::vector<std::string> col_ids_;
    std::vector<double> values_;
};

using RatioMatrix = GroupDatasetMatrix;  // P: performance ratios in (0, 1]
using TimeMatrix = GroupDatasetMatrix;   // E: summed execution times, >= 0

// Per-group set of dataset column indices still in play.
using ActiveSets = std::vector<std::set<std::size_t>>;

// CSV header: dataset_id,config_id,group_ids,performance,time_seconds,shared_cost_id
// group_ids are semicolon-separated; shared_cost_id may be empty.
std::vector<RunRecord> load_run_records(std::istream& in);

struct Matrices {
    RatioMatrix performance;  // P
    TimeMatrix time;          // E
};

// P[g,d] = max perf of configs in g on d / max perf of all configs on d.
// E[g,d] = sum of times of configs in g on d; when dedup_shared_cost,
// records sharing a shared_cost_id within one (g,d) cell are counted once.
Matrices build_matrices(const std::vector<RunRecord>& records, const GroupCatalog& catalog,
                        bool dedup_shared_cost = true);

// Active[g] = { d : P[g,d] present }
ActiveSets init_active(const RatioMatrix& performance);

}  // namespace shsr
