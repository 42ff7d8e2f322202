#include <cmath>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "ims3/csv.hpp"
#include "ims3/eval.hpp"

using namespace ims3;

namespace {

LabeledDataset gmm_split(int classes, int per_class, double mean_scale, double cov, std::uint64_t seed,
                         const std::string& tag) {
    GmmSpec spec;
    spec.class_count = classes;
    spec.dim = std::max(classes, 4);
    spec.means = simplex_means(classes, spec.dim, mean_scale);
    spec.cov_scale = cov;
    spec.n_train_per_class = per_class;
    spec.n_test_per_class = per_class / 2;
    Rng rng(seed);
    auto [train, test] = generate_gmm(spec, rng);
    return tag == "train" ? train : test;
}

}  // namespace

TEST_CASE("single-class degenerate evaluation is perfect") {
    LabeledDataset single;
    single.class_count = 1;
    for (int i = 0; i < 10; ++i) {
        single.samples.push_back({0.1 * i, 1.0});
        single.labels.push_back(0);
    }
    ClassifierConfig quick;
    quick.epochs = 3;
    CHECK(train_and_eval(single, single, 1, quick) == 1.0);
}

TEST_CASE("uniformly shuffled labels land near chance level") {
    LabeledDataset train = gmm_split(5, 100, 4.0, 1.0, 21, "train");
    const LabeledDataset test = gmm_split(5, 100, 4.0, 1.0, 21, "test");

    Rng shuffle_rng(99);
    for (auto& label : train.labels) label = shuffle_rng.uniform_int(0, 4);

    ClassifierConfig quick;
    quick.epochs = 30;
    double mean = 0.0;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) mean += train_and_eval(train, test, seed, quick) / 3.0;
    MESSAGE("chance-level accuracy: ", mean);
    CHECK(mean >= 0.1);
    CHECK(mean <= 0.3);
}

TEST_CASE("full real training on a well-separated mixture is accurate") {
    const LabeledDataset train = gmm_split(5, 200, 8.0, 1.0, 22, "train");
    const LabeledDataset test = gmm_split(5, 200, 8.0, 1.0, 22, "test");
    CHECK(train_and_eval(train, test, 7) >= 0.95);
}

TEST_CASE("evaluation is deterministic per seed") {
    const LabeledDataset train = gmm_split(3, 50, 4.0, 1.0, 23, "train");
    const LabeledDataset test = gmm_split(3, 50, 4.0, 1.0, 23, "test");
    ClassifierConfig quick;
    quick.epochs = 10;
    CHECK(train_and_eval(train, test, 5, quick) == train_and_eval(train, test, 5, quick));
}

TEST_CASE("identical datasets under two names produce identical reports") {
    const LabeledDataset train = gmm_split(3, 40, 4.0, 1.0, 24, "train");
    const LabeledDataset test = gmm_split(3, 40, 4.0, 1.0, 24, "test");
    ClassifierConfig quick;
    quick.epochs = 10;
    const auto reports = compare_methods({{"first", train}, {"second", train}}, test, {1, 2, 3}, quick);
    REQUIRE(reports.size() == 2);
    REQUIRE(reports[0].second.accuracies.size() == 3);
    for (int k = 0; k < 3; ++k)
        CHECK(reports[0].second.accuracies[k] == reports[1].second.accuracies[k]);
    CHECK(reports[0].second.mean == reports[1].second.mean);
    CHECK(reports[0].second.config_fingerprint == reports[1].second.config_fingerprint);
}

TEST_CASE("report mean and std recompute from the per-seed list") {
    const EvalReport r = make_report({0.5, 0.6, 0.7}, "fp");
    CHECK(std::abs(r.mean - 0.6) < 1e-12);
    const double want_std = std::sqrt(((0.1 * 0.1) + 0.0 + (0.1 * 0.1)) / 2.0);
    CHECK(std::abs(r.stddev - want_std) < 1e-12);

    const EvalReport single = make_report({0.5}, "fp");
    CHECK(single.stddev == 0.0);
}

TEST_CASE("fingerprint tracks recipe and seeds") {
    ClassifierConfig a, b;
    b.lr *= 2.0;
    CHECK(eval_fingerprint(a, {1, 2}) == eval_fingerprint(a, {1, 2}));
    CHECK(eval_fingerprint(a, {1, 2}) != eval_fingerprint(b, {1, 2}));
    CHECK(eval_fingerprint(a, {1, 2}) != eval_fingerprint(a, {1, 3}));
}

TEST_CASE("results and summary csv layout") {
    const std::vector<std::pair<std::string, EvalReport>> reports{
        {"random_real", make_report({0.5, 0.7}, "fp")},
        {"im_s3", make_report({0.8, 0.9}, "fp")},
    };
    const auto dir = std::filesystem::temp_directory_path();
    const auto results = dir / "ims3_results_test.csv";
    const auto summary = dir / "ims3_summary_test.csv";
    write_results_csv(reports, 10, {4, 5}, results);
    write_summary_csv(reports, 10, summary);

    const auto rt = read_csv(results);
    const auto st = read_csv(summary);
    std::filesystem::remove(results);
    std::filesystem::remove(summary);

    REQUIRE(rt.header == std::vector<std::string>{"method", "ipc", "seed", "accuracy"});
    REQUIRE(rt.rows.size() == 4);
    CHECK(rt.rows[0][0] == "random_real");
    CHECK(rt.rows[3][3] == "0.9");
    REQUIRE(st.header == std::vector<std::string>{"method", "ipc", "mean", "std"});
    REQUIRE(st.rows.size() == 2);
    CHECK(parse_double(st.rows[1][2]) == doctest::Approx(0.85).epsilon(1e-12));
}
