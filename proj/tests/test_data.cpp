#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "ims3/csv.hpp"
#include "ims3/data.hpp"

using namespace ims3;

namespace {

GmmSpec separable_spec(double mean_scale, double cov_scale) {
    GmmSpec spec;
    spec.class_count = 2;
    spec.dim = 4;
    spec.means = simplex_means(2, 4, mean_scale);
    spec.cov_scale = cov_scale;
    spec.n_train_per_class = 100;
    spec.n_test_per_class = 25;
    return spec;
}

}  // namespace

TEST_CASE("simplex means are centered and equidistant") {
    const auto means = simplex_means(5, 8, 4.0);
    REQUIRE(means.size() == 5);
    Vec center(8, 0.0);
    for (const auto& m : means) axpy(0.2, m, center);
    CHECK(norm(center) < 1e-12);
    const double d01 = [&] {
        Vec d = means[0];
        axpy(-1.0, means[1], d);
        return norm(d);
    }();
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) {
            Vec d = means[i];
            axpy(-1.0, means[j], d);
            CHECK(norm(d) == doctest::Approx(d01).epsilon(1e-12));
        }
    CHECK_THROWS_AS(simplex_means(5, 3, 1.0), Error);
}

TEST_CASE("degenerate covariance collapses samples onto the means") {
    GmmSpec spec = separable_spec(2.0, 0.0);
    Rng rng(1);
    const auto [train, test] = generate_gmm(spec, rng);
    REQUIRE(train.size() == 200);
    REQUIRE(test.size() == 50);
    for (std::size_t i = 0; i < train.size(); ++i) {
        Vec d = train.samples[i];
        axpy(-1.0, spec.means[train.labels[i]], d);
        CHECK(norm(d) == 0.0);
    }
}

TEST_CASE("gmm generation is deterministic per seed") {
    const GmmSpec spec = separable_spec(2.0, 1.0);
    Rng a(9), b(9);
    const auto [train_a, test_a] = generate_gmm(spec, a);
    const auto [train_b, test_b] = generate_gmm(spec, b);
    REQUIRE(train_a.size() == train_b.size());
    for (std::size_t i = 0; i < train_a.size(); ++i) {
        CHECK(train_a.labels[i] == train_b.labels[i]);
        for (int j = 0; j < spec.dim; ++j) CHECK(train_a.samples[i][j] == train_b.samples[i][j]);
    }
}

TEST_CASE("per-class empirical means satisfy the CLT bound") {
    GmmSpec spec = separable_spec(3.0, 0.7);
    spec.n_train_per_class = 400;
    Rng rng(17);
    const auto [train, test] = generate_gmm(spec, rng);
    for (int c = 0; c < spec.class_count; ++c) {
        Vec mean(spec.dim, 0.0);
        int count = 0;
        for (std::size_t i = 0; i < train.size(); ++i)
            if (train.labels[i] == c) {
                axpy(1.0, train.samples[i], mean);
                ++count;
            }
        for (auto& x : mean) x /= count;
        Vec d = mean;
        axpy(-1.0, spec.means[c], d);
        CHECK(norm(d) < 3.0 * spec.cov_scale * std::sqrt(static_cast<double>(spec.dim)) /
                             std::sqrt(static_cast<double>(count)));
    }
}

TEST_CASE("feature extractor separates a well-separated mixture") {
    // mean distance 10x the noise scale
    GmmSpec spec = separable_spec(10.0 / std::sqrt(2.0), 1.0);
    Rng data_rng(3);
    const auto [train, test] = generate_gmm(spec, data_rng);
    Rng fit_rng(4);
    const FeatureExtractor fx = fit_feature_extractor(train, fit_rng);
    CHECK(classifier_accuracy(fx.net, train.samples, train.labels) >= 0.99);
}

TEST_CASE("features are unit norm and frozen-deterministic") {
    GmmSpec spec = separable_spec(4.0, 1.0);
    Rng data_rng(5);
    const auto [train, test] = generate_gmm(spec, data_rng);
    Rng fit_rng(6);
    const FeatureExtractor fx = fit_feature_extractor(train, fit_rng);

    Rng probe_rng(7);
    for (int i = 0; i < 100; ++i) {
        const Vec x = gaussian_sample(probe_rng, spec.dim);
        const Vec f1 = fx.embed(x);
        const Vec f2 = fx.embed(x);
        CHECK(std::abs(norm(f1) - 1.0) < 1e-10);
        for (std::size_t j = 0; j < f1.size(); ++j) CHECK(f1[j] == f2[j]);
    }
    CHECK(fx.feature_dim() == 32);
}

TEST_CASE("feature extractor requires two classes and flags divergence") {
    LabeledDataset single;
    single.class_count = 1;
    single.samples = {{1.0, 2.0}};
    single.labels = {0};
    Rng rng(8);
    CHECK_THROWS_AS(fit_feature_extractor(single, rng), Error);

    LabeledDataset poisoned;
    poisoned.class_count = 2;
    poisoned.samples = {{std::nan(""), 0.0}, {1.0, 1.0}};
    poisoned.labels = {0, 1};
    ClassifierConfig cfg;
    cfg.epochs = 1;
    Rng rng2(9);
    CHECK_THROWS_AS(fit_feature_extractor(poisoned, rng2, cfg), TrainingDiverged);
}

TEST_CASE("make_distilled concatenates selected subgroups") {
    std::vector<std::vector<Vec>> groups(5);
    for (int c = 0; c < 5; ++c)
        for (int k = 0; k < 10; ++k) groups[c].push_back({static_cast<double>(c), static_cast<double>(k)});
    const LabeledDataset d = make_distilled(groups, 10);
    CHECK(d.size() == 50);
    CHECK(d.class_count == 5);
    std::vector<int> counts(5, 0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        ++counts[d.labels[i]];
        CHECK(d.samples[i][0] == static_cast<double>(d.labels[i]));
    }
    for (int c = 0; c < 5; ++c) CHECK(counts[c] == 10);

    CHECK_THROWS_AS(make_distilled(groups, 9), Error);
}

TEST_CASE("dataset csv round trip is bit exact") {
    GmmSpec spec = separable_spec(2.0, 1.0);
    spec.n_train_per_class = 20;
    Rng rng(10);
    const auto [train, test] = generate_gmm(spec, rng);

    const auto path = std::filesystem::temp_directory_path() / "ims3_dataset_test.csv";
    write_dataset_csv(train, path);
    const LabeledDataset loaded = read_dataset_csv(path);
    std::filesystem::remove(path);

    REQUIRE(loaded.size() == train.size());
    CHECK(loaded.class_count == train.class_count);
    for (std::size_t i = 0; i < train.size(); ++i) {
        CHECK(loaded.labels[i] == train.labels[i]);
        for (int j = 0; j < spec.dim; ++j) CHECK(loaded.samples[i][j] == train.samples[i][j]);
    }
}

TEST_CASE("extractor checkpoint round trip") {
    GmmSpec spec = separable_spec(4.0, 1.0);
    Rng data_rng(11);
    const auto [train, test] = generate_gmm(spec, data_rng);
    Rng fit_rng(12);
    ClassifierConfig cfg;
    cfg.epochs = 5;
    const FeatureExtractor fx = fit_feature_extractor(train, fit_rng, cfg);

    const auto path = std::filesystem::temp_directory_path() / "ims3_extractor_test.ckpt";
    save_extractor(fx, path);
    const FeatureExtractor loaded = load_extractor(path);
    std::filesystem::remove(path);

    Rng probe_rng(13);
    const Vec x = gaussian_sample(probe_rng, spec.dim);
    const Vec a = fx.embed(x);
    const Vec b = loaded.embed(x);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("features csv writes labels and rows") {
    const std::vector<int> labels{0, 1};
    const std::vector<Vec> feats{{0.6, 0.8}, {1.0, 0.0}};
    const auto path = std::filesystem::temp_directory_path() / "ims3_features_test.csv";
    write_features_csv(labels, feats, path);
    const auto table = read_csv(path);
    std::filesystem::remove(path);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.header == std::vector<std::string>{"label", "f_1", "f_2"});
    CHECK(parse_double(table.rows[0][1]) == 0.6);
}
