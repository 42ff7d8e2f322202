#include "ims3/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ims3/csv.hpp"

namespace ims3 {

double train_and_eval(const LabeledDataset& train_set, const LabeledDataset& test_set, std::uint64_t seed,
                      const ClassifierConfig& recipe) {
    if (train_set.size() == 0 || test_set.size() == 0) throw Error("train_and_eval: empty dataset");
    const int class_count = std::max(train_set.class_count, test_set.class_count);
    Rng rng(seed);
    const SoftmaxClassifier net =
        train_classifier(train_set.samples, train_set.labels, class_count, recipe, rng);
    return classifier_accuracy(net, test_set.samples, test_set.labels);
}

EvalReport make_report(const std::vector<double>& accuracies, const std::string& fingerprint) {
    EvalReport report;
    report.accuracies = accuracies;
    report.config_fingerprint = fingerprint;
    const double n = static_cast<double>(accuracies.size());
    double sum = 0.0;
    for (double a : accuracies) sum += a;
    report.mean = accuracies.empty() ? 0.0 : sum / n;
    if (accuracies.size() > 1) {
        double ss = 0.0;
        for (double a : accuracies) ss += (a - report.mean) * (a - report.mean);
        report.stddev = std::sqrt(ss / (n - 1.0));
    }
    return report;
}

std::string eval_fingerprint(const ClassifierConfig& recipe, const std::vector<std::uint64_t>& seeds) {
    std::ostringstream blob;
    blob << recipe.hidden_dim << '|' << recipe.epochs << '|' << recipe.batch_size << '|' << recipe.lr << '|'
         << recipe.init_std;
    for (auto s : seeds) blob << '|' << s;
    std::ostringstream hex;
    hex << std::hex << fnv1a64(blob.str());
    return hex.str();
}

std::vector<std::pair<std::string, EvalReport>> compare_methods(
    const std::vector<std::pair<std::string, LabeledDataset>>& methods, const LabeledDataset& test_set,
    const std::vector<std::uint64_t>& seeds, const ClassifierConfig& recipe) {
    if (methods.empty()) throw Error("compare_methods: no methods");
    const std::string fingerprint = eval_fingerprint(recipe, seeds);
    std::vector<std::pair<std::string, EvalReport>> out;
    out.reserve(methods.size());
    for (const auto& [name, dataset] : methods) {
        std::vector<double> accs;
        accs.reserve(seeds.size());
        for (std::uint64_t seed : seeds) accs.push_back(train_and_eval(dataset, test_set, seed, recipe));
        out.emplace_back(name, make_report(accs, fingerprint));
    }
    return out;
}

void write_results_csv(const std::vector<std::pair<std::string, EvalReport>>& reports, int ipc,
                       const std::vector<std::uint64_t>& seeds, const std::filesystem::path& path) {
    CsvWriter csv(path, {"method", "ipc", "seed", "accuracy"});
    for (const auto& [name, report] : reports)
        for (std::size_t k = 0; k < report.accuracies.size(); ++k)
            csv.row({name, std::to_string(ipc), std::to_string(seeds[k]),
                     format_double(report.accuracies[k])});
}

void write_summary_csv(const std::vector<std::pair<std::string, EvalReport>>& reports, int ipc,
                       const std::filesystem::path& path) {
    CsvWriter csv(path, {"method", "ipc", "mean", "std"});
    for (const auto& [name, report] : reports)
        csv.row({name, std::to_string(ipc), format_double(report.mean), format_double(report.stddev)});
}

}  // namespace ims3
