#pragma once

#include <filesystem>

#include "ims3/data.hpp"

namespace ims3 {

/// Top-1 accuracies over seeds for one method under the shared recipe.
struct EvalReport {
    std::vector<double> accuracies;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single seed
    std::string config_fingerprint;
};

/// Trains a fresh classifier on train_set under the fixed recipe and
/// returns Top-1 accuracy on test_set. Deterministic per seed.
double train_and_eval(const LabeledDataset& train_set, const LabeledDataset& test_set, std::uint64_t seed,
                      const ClassifierConfig& recipe = ClassifierConfig{});

/// One report per method; every method sees the identical recipe and seeds.
std::vector<std::pair<std::string, EvalReport>> compare_methods(
    const std::vector<std::pair<std::string, LabeledDataset>>& methods, const LabeledDataset& test_set,
    const std::vector<std::uint64_t>& seeds, const ClassifierConfig& recipe = ClassifierConfig{});

EvalReport make_report(const std::vector<double>& accuracies, const std::string& fingerprint);

std::string eval_fingerprint(const ClassifierConfig& recipe, const std::vector<std::uint64_t>& seeds);

void write_results_csv(const std::vector<std::pair<std::string, EvalReport>>& reports, int ipc,
                       const std::vector<std::uint64_t>& seeds, const std::filesystem::path& path);
void write_summary_csv(const std::vector<std::pair<std::string, EvalReport>>& reports, int ipc,
                       const std::filesystem::path& path);

}  // namespace ims3
