#include "ims3/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ims3 {

Vec SoftmaxClassifier::hidden_activations(const Vec& x) const {
    Vec h = matvec(w1, x);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::tanh(h[i] + b1[i]);
    return h;
}

Vec SoftmaxClassifier::logits(const Vec& x) const {
    Vec out = matvec(w2, hidden_activations(x));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b2[i];
    return out;
}

int SoftmaxClassifier::predict(const Vec& x) const {
    const Vec l = logits(x);
    return static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
}

namespace {

Vec softmax(const Vec& logits) {
    const double m = *std::max_element(logits.begin(), logits.end());
    Vec p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        z += p[i];
    }
    for (auto& x : p) x /= z;
    return p;
}

std::size_t param_count(const SoftmaxClassifier& net) {
    return net.w1.size() + net.b1.size() + net.w2.size() + net.b2.size();
}

Vec flatten(const SoftmaxClassifier& net) {
    Vec flat;
    flat.reserve(param_count(net));
    flat.insert(flat.end(), net.w1.data.begin(), net.w1.data.end());
    flat.insert(flat.end(), net.b1.begin(), net.b1.end());
    flat.insert(flat.end(), net.w2.data.begin(), net.w2.data.end());
    flat.insert(flat.end(), net.b2.begin(), net.b2.end());
    return flat;
}

void assign(SoftmaxClassifier& net, const Vec& flat) {
    std::size_t off = 0;
    auto take = [&](Vec& dst) {
        std::copy(flat.begin() + off, flat.begin() + off + dst.size(), dst.begin());
        off += dst.size();
    };
    take(net.w1.data);
    take(net.b1);
    take(net.w2.data);
    take(net.b2);
}

}  // namespace

SoftmaxClassifier train_classifier(const std::vector<Vec>& samples, const std::vector<int>& labels,
                                   int class_count, const ClassifierConfig& cfg, Rng& rng) {
    if (samples.empty() || samples.size() != labels.size())
        throw Error("train_classifier: bad dataset");
    const int input_dim = static_cast<int>(samples.front().size());

    SoftmaxClassifier net;
    net.input_dim = input_dim;
    net.hidden_dim = cfg.hidden_dim;
    net.class_count = class_count;
    net.w1 = Mat(cfg.hidden_dim, input_dim);
    net.b1 = Vec(cfg.hidden_dim, 0.0);
    net.w2 = Mat(class_count, cfg.hidden_dim);
    net.b2 = Vec(class_count, 0.0);
    for (auto& x : net.w1.data) x = cfg.init_std * rng.normal();
    for (auto& x : net.w2.data) x = cfg.init_std * rng.normal();

    AdamWState opt(param_count(net), cfg.lr);
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);

    Mat gw1(net.w1.rows, net.w1.cols), gw2(net.w2.rows, net.w2.cols);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(start + static_cast<std::size_t>(cfg.batch_size), order.size());
            std::fill(gw1.data.begin(), gw1.data.end(), 0.0);
            std::fill(gw2.data.begin(), gw2.data.end(), 0.0);
            Vec gb1(net.b1.size(), 0.0), gb2(net.b2.size(), 0.0);
            const double scale = 1.0 / static_cast<double>(end - start);
            double batch_loss = 0.0;

            for (std::size_t k = start; k < end; ++k) {
                const Vec& x = samples[order[k]];
                const int y = labels[order[k]];
                const Vec h = net.hidden_activations(x);
                Vec logit = matvec(net.w2, h);
                for (std::size_t i = 0; i < logit.size(); ++i) logit[i] += net.b2[i];
                Vec p = softmax(logit);
                batch_loss -= std::log(std::max(p[y], 1e-300));

                p[y] -= 1.0;  // d(cross-entropy)/d(logits)
                for (auto& g : p) g *= scale;
                axpy(1.0, p, gb2);
                add_outer(gw2, p, h);
                Vec gh = matvec_transposed(net.w2, p);
                for (std::size_t i = 0; i < gh.size(); ++i) gh[i] *= 1.0 - h[i] * h[i];
                axpy(1.0, gh, gb1);
                add_outer(gw1, gh, x);
            }
            if (!std::isfinite(batch_loss)) throw TrainingDiverged("train_classifier: non-finite loss");

            Vec flat = flatten(net);
            Vec grad;
            grad.reserve(flat.size());
            grad.insert(grad.end(), gw1.data.begin(), gw1.data.end());
            grad.insert(grad.end(), gb1.begin(), gb1.end());
            grad.insert(grad.end(), gw2.data.begin(), gw2.data.end());
            grad.insert(grad.end(), gb2.begin(), gb2.end());
            adamw_step(flat, grad, opt);
            assign(net, flat);
        }
    }
    return net;
}

double classifier_accuracy(const SoftmaxClassifier& net, const std::vector<Vec>& samples,
                           const std::vector<int>& labels) {
    if (samples.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (net.predict(samples[i]) == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(samples.size());
}

}  // namespace ims3
