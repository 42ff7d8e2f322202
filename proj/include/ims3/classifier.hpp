#pragma once

#include "ims3/math.hpp"

namespace ims3 {

struct ClassifierConfig {
    int hidden_dim = 32;
    int epochs = 100;
    int batch_size = 32;
    double lr = 0.01;
    double init_std = 0.1;
};

/// One-hidden-layer tanh network with a softmax head, trained with AdamW
/// on cross-entropy. Used both as the downstream eval model and as the
/// backbone of the frozen feature extractor.
struct SoftmaxClassifier {
    int input_dim = 0;
    int hidden_dim = 0;
    int class_count = 0;
    Mat w1;  // hidden x input
    Vec b1;
    Mat w2;  // class x hidden
    Vec b2;

    Vec hidden_activations(const Vec& x) const;
    Vec logits(const Vec& x) const;
    int predict(const Vec& x) const;
};

struct ClassifierSample {
    const std::vector<Vec>* samples = nullptr;
    const std::vector<int>* labels = nullptr;
};

SoftmaxClassifier train_classifier(const std::vector<Vec>& samples, const std::vector<int>& labels,
                                   int class_count, const ClassifierConfig& cfg, Rng& rng);

double classifier_accuracy(const SoftmaxClassifier& net, const std::vector<Vec>& samples,
                           const std::vector<int>& labels);

}  // namespace ims3
