#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shsr/baselines.hpp"
#include "shsr/data_model.hpp"
#include "shsr/evaluation.hpp"
#include "shsr/metafeatures.hpp"
#include "shsr/rng.hpp"
#include "shsr/shsr.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path, std::string* out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    *out = ss.str();
    return *out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// temp file + rename so partially written outputs never appear
void atomic_write(const std::string& path, const std::string& content) {
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) throw IoError("write failed for " + tmp.string());
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path);
}

struct Manifest {
    std::string command;
    ordered_json parameters = ordered_json::object();
    ordered_json inputs = ordered_json::array();
    std::uint64_t seed = 0;

    void add_input(const std::string& path, const std::string& bytes) {
        ordered_json j;
        j["path"] = path;
        std::ostringstream os;
        os << std::hex << fnv1a64(bytes);
        j["fnv1a64"] = os.str();
        inputs.push_back(std::move(j));
    }

    ordered_json to_json() const {
        ordered_json j;
        j["command"] = command;
        j["parameters"] = parameters;
        j["inputs"] = inputs;
        j["seed"] = seed;
        j["tool_version"] = kVersion;
        return j;
    }
};

shsr::eval::Corpus load_corpus(const std::string& path, Manifest& mf) {
    std::string bytes;
    read_file(path, &bytes);
    mf.add_input(path, bytes);
    std::istringstream in(bytes);
    return shsr::eval::Corpus::build(shsr::load_run_records(in));
}

shsr::meta::MetaFeatureTable load_meta(const std::string& path, Manifest& mf) {
    std::string bytes;
    read_file(path, &bytes);
    mf.add_input(path, bytes);
    std::istringstream in(bytes);
    return shsr::meta::load_meta_table(in);
}

void write_reports(const std::vector<shsr::eval::EvaluationReport>& reports, const Manifest& mf,
                   const std::string& out_path, const std::string& csv_path) {
    if (!out_path.empty()) {
        ordered_json j;
        j["manifest"] = mf.to_json();
        auto& arr = j["reports"] = ordered_json::array();
        for (const auto& r : reports) arr.push_back(r.to_json());
        atomic_write(out_path, j.dump(2) + "\n");
    }
    if (!csv_path.empty()) {
        std::ostringstream os;
        shsr::eval::emit_plot_data(reports, os);
        atomic_write(csv_path, os.str());
        ordered_json j;
        j["manifest"] = mf.to_json();
        atomic_write(csv_path + ".manifest.json", j.dump(2) + "\n");
    }
}

int cmd_extract_meta(const std::vector<std::string>& data_files, const std::string& target,
                     const std::string& task, std::uint64_t seed, const std::string& out) {
    Manifest mf;
    mf.command = "extract-meta";
    mf.seed = seed;
    mf.parameters["target"] = target;
    mf.parameters["task"] = task;

    shsr::meta::TaskKind kind = shsr::meta::TaskKind::None;
    if (task == "binary") kind = shsr::meta::TaskKind::BinaryClassification;
    else if (task == "regression") kind = shsr::meta::TaskKind::Regression;
    else if (!task.empty() && task != "none") throw shsr::DataError("unknown task: " + task);

    shsr::meta::MetaFeatureTable table;
    table.feature_names.assign(shsr::meta::meta_feature_names().begin(),
                               shsr::meta::meta_feature_names().end());
    for (const auto& path : data_files) {
        std::string bytes;
        read_file(path, &bytes);
        mf.add_input(path, bytes);
        std::istringstream in(bytes);
        std::optional<std::string> tgt;
        if (!target.empty()) tgt = target;
        shsr::meta::TabularDataset ds = shsr::meta::load_tabular_csv(in, tgt, kind);
        shsr::meta::MetaFeatureVector v = shsr::meta::extract_all(ds, seed);
        table.rows[fs::path(path).stem().string()] = {v.values.begin(), v.values.end()};
    }
    std::ostringstream os;
    shsr::meta::save_meta_table(os, table);
    atomic_write(out, os.str());
    ordered_json j;
    j["manifest"] = mf.to_json();
    atomic_write(out + ".manifest.json", j.dump(2) + "\n");
    return 0;
}

int cmd_fit(const std::string& runs, const std::string& meta_path, double threshold,
            std::uint64_t seed, bool dedup, const std::string& out) {
    Manifest mf;
    mf.command = "fit";
    mf.seed = seed;
    mf.parameters["threshold"] = threshold;
    mf.parameters["dedup_shared_cost"] = dedup;

    if (threshold > 1.0)
        std::cerr << "warning: threshold > 1 yields an empty filter sequence\n";

    shsr::eval::Corpus corpus = load_corpus(runs, mf);
    shsr::meta::MetaFeatureTable meta = load_meta(meta_path, mf);
    shsr::Matrices m = shsr::build_matrices(corpus.records, corpus.catalog, dedup);
    shsr::ActiveSets active = shsr::init_active(m.performance);
    shsr::FilterSequence seq =
        shsr::fit_shsr(m.performance, m.time, meta, threshold, std::move(active), seed);

    ordered_json j;
    j["manifest"] = mf.to_json();
    j["filter_sequence"] = seq.to_json();
    atomic_write(out, j.dump(2) + "\n");
    std::cout << "fitted " << seq.steps.size() << " filter step(s)\n";
    return 0;
}

int cmd_apply(const std::string& model_path, const std::string& meta_path,
              const std::string& dataset, const std::string& out) {
    Manifest mf;
    mf.command = "apply";
    std::string bytes;
    read_file(model_path, &bytes);
    mf.add_input(model_path, bytes);
    nlohmann::json mj = nlohmann::json::parse(bytes);
    shsr::FilterSequence seq = shsr::FilterSequence::from_json(
        mj.contains("filter_sequence") ? mj.at("filter_sequence") : mj);
    shsr::meta::MetaFeatureTable meta = load_meta(meta_path, mf);

    std::vector<std::string> targets;
    if (!dataset.empty()) {
        targets.push_back(dataset);
    } else {
        for (const auto& [id, row] : meta.rows) targets.push_back(id);
    }

    ordered_json results = ordered_json::array();
    for (const auto& id : targets) {
        shsr::ApplyResult res = shsr::apply_filter(seq, meta, id);
        std::cout << id << ": kept {";
        bool first = true;
        for (const auto& g : res.kept) {
            std::cout << (first ? "" : ", ") << g;
            first = false;
        }
        std::cout << "} dropped {";
        first = true;
        for (const auto& g : res.dropped) {
            std::cout << (first ? "" : ", ") << g;
            first = false;
        }
        std::cout << "}";
        if (res.safeguard_triggered) std::cout << " [safeguard_triggered]";
        std::cout << "\n";

        ordered_json r;
        r["dataset_id"] = id;
        r["kept"] = res.kept;
        r["dropped"] = res.dropped;
        r["safeguard_triggered"] = res.safeguard_triggered;
        results.push_back(std::move(r));
    }
    if (!out.empty()) {
        ordered_json j;
        j["manifest"] = mf.to_json();
        j["results"] = results;
        atomic_write(out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_evaluate(const std::string& runs, const std::string& meta_path,
                 std::vector<double> thresholds, double subsample, int repeats, double test_frac,
                 std::uint64_t seed, bool dedup, const std::string& out, const std::string& csv) {
    Manifest mf;
    mf.command = "evaluate";
    mf.seed = seed;
    if (thresholds.empty()) thresholds = {0.999};
    mf.parameters["thresholds"] = thresholds;
    mf.parameters["subsample"] = subsample;
    mf.parameters["repeats"] = repeats;
    mf.parameters["test_fraction"] = test_frac;
    mf.parameters["dedup_shared_cost"] = dedup;

    shsr::eval::Corpus corpus = load_corpus(runs, mf);
    shsr::meta::MetaFeatureTable meta = load_meta(meta_path, mf);
    if (subsample < 1.0)
        corpus = shsr::eval::Corpus::build(
            shsr::eval::subsample_results(corpus.records, subsample, shsr::derive_seed(seed, 99)));

    std::vector<shsr::eval::EvaluationReport> reports;
    for (double t : thresholds) {
        shsr::eval::ShsrPolicy policy(t, dedup);
        reports.push_back(
            shsr::eval::evaluate_holdout(corpus, meta, policy, repeats, test_frac, seed, dedup));
        const auto& r = reports.back();
        std::cout << "shsr T=" << t << ": perf " << r.perf_mean << " (ci " << r.perf_ci
                  << "), time " << r.time_mean << " (ci " << r.time_ci << ")\n";
    }
    write_reports(reports, mf, out, csv);
    return 0;
}

int cmd_baseline_random(const std::string& runs, std::vector<double> fracs, int repeats,
                        double test_frac, std::uint64_t seed, const std::string& out,
                        const std::string& csv) {
    Manifest mf;
    mf.command = "baseline random";
    mf.seed = seed;
    if (fracs.empty()) fracs = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.97, 0.99};
    mf.parameters["fractions"] = fracs;
    mf.parameters["repeats"] = repeats;
    mf.parameters["test_fraction"] = test_frac;

    shsr::eval::Corpus corpus = load_corpus(runs, mf);
    shsr::meta::MetaFeatureTable meta;  // unused by the policy
    std::vector<shsr::eval::EvaluationReport> reports;
    for (double f : fracs) {
        shsr::baselines::RandomEliminationPolicy policy(f);
        reports.push_back(
            shsr::eval::evaluate_holdout(corpus, meta, policy, repeats, test_frac, seed));
        const auto& r = reports.back();
        std::cout << "random frac=" << f << ": perf " << r.perf_mean << ", time " << r.time_mean
                  << "\n";
    }
    write_reports(reports, mf, out, csv);
    return 0;
}

int cmd_baseline_knn(const std::string& runs, const std::string& meta_path, int neighbors,
                     double accd, std::vector<std::size_t> top_ms, int repeats, double test_frac,
                     std::uint64_t seed, const std::string& out, const std::string& csv) {
    Manifest mf;
    mf.command = "baseline knn";
    mf.seed = seed;
    if (top_ms.empty()) top_ms = {100, 300, 500, 1000, 1500, 2000, 2500};
    mf.parameters["neighbors"] = neighbors;
    mf.parameters["accd"] = accd;
    mf.parameters["top_m"] = top_ms;
    mf.parameters["repeats"] = repeats;
    mf.parameters["test_fraction"] = test_frac;

    shsr::eval::Corpus corpus = load_corpus(runs, mf);
    shsr::meta::MetaFeatureTable meta = load_meta(meta_path, mf);
    std::vector<shsr::eval::EvaluationReport> reports;
    for (std::size_t m : top_ms) {
        shsr::baselines::KnnArrPolicy policy({neighbors, accd, m});
        reports.push_back(
            shsr::eval::evaluate_holdout(corpus, meta, policy, repeats, test_frac, seed));
        const auto& r = reports.back();
        std::cout << "knn-arr m=" << m << ": perf " << r.perf_mean << ", time " << r.time_mean
                  << "\n";
    }
    write_reports(reports, mf, out, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential hyper-parameter space reduction toolkit"};
    app.require_subcommand(1);

    // extract-meta
    auto* extract = app.add_subcommand("extract-meta", "Compute meta-features from dataset CSVs");
    std::vector<std::string> data_files;
    std::string target, task = "none", out_path, csv_path;
    std::uint64_t seed = 0;
    extract->add_option("--data", data_files, "Dataset CSV file(s)")->required();
    extract->add_option("--target", target, "Target column name");
    extract->add_option("--task", task, "Task kind: binary | regression | none");
    extract->add_option("--seed", seed, "Random seed");
    extract->add_option("-o,--out", out_path, "Output meta-feature CSV")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a filter sequence from run records");
    std::string runs, meta_path, model_path, dataset;
    double threshold = 0.999, test_frac = 0.1, subsample = 1.0, accd = 0.01;
    bool no_dedup = false;
    int repeats = 20, neighbors = 3;
    fit->add_option("--runs", runs, "Run-record CSV")->required();
    fit->add_option("--meta", meta_path, "Meta-feature CSV")->required();
    fit->add_option("--threshold", threshold, "Tolerance threshold T");
    fit->add_option("--seed", seed, "Random seed");
    fit->add_flag("--no-dedup-shared", no_dedup, "Count shared costs per record");
    fit->add_option("-o,--out", out_path, "Output model JSON")->required();

    // apply
    auto* apply = app.add_subcommand("apply", "Apply a fitted filter sequence");
    apply->add_option("--model", model_path, "Model JSON from fit")->required();
    apply->add_option("--meta", meta_path, "Meta-feature CSV for the new dataset(s)")->required();
    apply->add_option("--dataset", dataset, "Apply to this dataset id only");
    apply->add_option("-o,--out", out_path, "Optional JSON output");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Repeated holdout evaluation of SHSR");
    std::vector<double> thresholds, fracs;
    evaluate->add_option("--runs", runs, "Run-record CSV")->required();
    evaluate->add_option("--meta", meta_path, "Meta-feature CSV")->required();
    evaluate->add_option("--threshold", thresholds, "Threshold(s) to evaluate");
    evaluate->add_option("--subsample", subsample, "Record subsample fraction (0, 1]");
    evaluate->add_option("--repeats", repeats, "Holdout repeats");
    evaluate->add_option("--test-frac", test_frac, "Test fraction");
    evaluate->add_option("--seed", seed, "Random seed");
    evaluate->add_flag("--no-dedup-shared", no_dedup, "Count shared costs per record");
    evaluate->add_option("-o,--out", out_path, "Report JSON");
    evaluate->add_option("--csv", csv_path, "Tidy CSV for plotting");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "Comparison policies");
    baseline->require_subcommand(1);
    auto* brandom = baseline->add_subcommand("random", "Random configuration elimination");
    brandom->add_option("--runs", runs, "Run-record CSV")->required();
    brandom->add_option("--frac", fracs, "Elimination fraction(s)");
    brandom->add_option("--repeats", repeats, "Holdout repeats");
    brandom->add_option("--test-frac", test_frac, "Test fraction");
    brandom->add_option("--seed", seed, "Random seed");
    brandom->add_option("-o,--out", out_path, "Report JSON");
    brandom->add_option("--csv", csv_path, "Tidy CSV for plotting");

    auto* bknn = baseline->add_subcommand("knn", "KNN + adjusted-ratio-of-ratios ranking");
    std::vector<std::size_t> top_ms;
    bknn->add_option("--runs", runs, "Run-record CSV")->required();
    bknn->add_option("--meta", meta_path, "Meta-feature CSV")->required();
    bknn->add_option("--neighbors", neighbors, "Neighbor count N");
    bknn->add_option("--accd", accd, "AccD time-tradeoff weight");
    bknn->add_option("--top-m", top_ms, "Kept configuration count(s)");
    bknn->add_option("--repeats", repeats, "Holdout repeats");
    bknn->add_option("--test-frac", test_frac, "Test fraction");
    bknn->add_option("--seed", seed, "Random seed");
    bknn->add_option("-o,--out", out_path, "Report JSON");
    bknn->add_option("--csv", csv_path, "Tidy CSV for plotting");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (extract->parsed()) return cmd_extract_meta(data_files, target, task, seed, out_path);
        if (fit->parsed())
            return cmd_fit(runs, meta_path, threshold, seed, !no_dedup, out_path);
        if (apply->parsed()) return cmd_apply(model_path, meta_path, dataset, out_path);
        if (evaluate->parsed())
            return cmd_evaluate(runs, meta_path, thresholds, subsample, repeats, test_frac, seed,
                                !no_dedup, out_path, csv_path);
        if (brandom->parsed())
            return cmd_baseline_random(runs, fracs, repeats, test_frac, seed, out_path, csv_path);
        if (bknn->parsed())
            return cmd_baseline_knn(runs, meta_path, neighbors, accd, top_ms, repeats, test_frac,
                                    seed, out_path, csv_path);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
