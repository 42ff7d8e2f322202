#pragma once

#include <filesystem>

#include "ims3/classifier.hpp"

namespace ims3 {

/// Class-conditional Gaussian mixture specification.
struct GmmSpec {
    int class_count = 0;
    int dim = 0;
    std::vector<Vec> means;  // one per class, pairwise distinct
    double cov_scale = 1.0;  // isotropic standard deviation
    int n_train_per_class = 500;
    int n_test_per_class = 100;
};

/// Class means at the vertices of a regular simplex (first `classes`
/// coordinate axes, recentered), scaled by `scale`. Requires dim >= classes.
std::vector<Vec> simplex_means(int classes, int dim, double scale);

struct LabeledDataset {
    std::vector<Vec> samples;
    std::vector<int> labels;
    std::string split;
    int class_count = 0;

    std::size_t size() const { return samples.size(); }
};

std::pair<LabeledDataset, LabeledDataset> generate_gmm(const GmmSpec& spec, Rng& rng);

/// Frozen encoder phi: unit-norm hidden activations of a classifier
/// trained on the real train split.
struct FeatureExtractor {
    SoftmaxClassifier net;

    int feature_dim() const { return net.hidden_dim; }
    int input_dim() const { return net.input_dim; }
    Vec embed(const Vec& x) const;
};

FeatureExtractor fit_feature_extractor(const LabeledDataset& train, Rng& rng,
                                       const ClassifierConfig& cfg = ClassifierConfig{});

/// Concatenates the selected subgroups (K == ipc samples each) into a
/// distilled dataset with one label per class.
LabeledDataset make_distilled(const std::vector<std::vector<Vec>>& subgroups_per_class, int ipc);

void write_dataset_csv(const LabeledDataset& dataset, const std::filesystem::path& path);
LabeledDataset read_dataset_csv(const std::filesystem::path& path);

void write_features_csv(const std::vector<int>& labels, const std::vector<Vec>& features,
                        const std::filesystem::path& path);

// Feature-extractor checkpoint (same container format as the denoiser's).
void save_extractor(const FeatureExtractor& fx, const std::filesystem::path& path);
FeatureExtractor load_extractor(const std::filesystem::path& path);

}  // namespace ims3
