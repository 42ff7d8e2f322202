#pragma once

#include <filesystem>

#include "ims3/math.hpp"

namespace ims3 {

struct DenoiserDims {
    int latent_dim = 0;     // d
    int hidden_dim = 64;    // width of the two hidden layers
    int class_count = 0;    // C
    int class_emb_dim = 8;  // e
    int time_freqs = 8;     // sinusoidal frequency pairs
    int t_max = 0;          // T of the schedule the model is conditioned on

    int time_feature_dim() const { return 2 * time_freqs; }
    int input_dim() const { return latent_dim + time_feature_dim() + class_emb_dim; }
};

/// Class-conditional noise predictor: a tanh MLP over the concatenation
/// [z ; sinusoidal(t/T) ; class embedding]. Two hidden layers, linear output.
struct DenoiserParams {
    DenoiserDims dims;
    Mat w1;  // hidden x input
    Vec b1;
    Mat w2;  // hidden x hidden
    Vec b2;
    Mat w3;  // latent x hidden
    Vec b3;
    Mat class_emb;  // class_count x class_emb_dim

    std::size_t parameter_count() const;
    Vec flatten() const;
    void assign_from_flat(const Vec& flat);
};

using DenoiserGrads = DenoiserParams;

/// Gaussian(0, init_std) weights and embeddings, zero biases.
DenoiserParams init_denoiser(const DenoiserDims& dims, Rng& rng, double init_std = 0.02);

DenoiserGrads zero_grads(const DenoiserDims& dims);

/// Fixed sinusoidal features of t / t_max.
Vec time_features(const DenoiserDims& dims, int t);

/// Predicted noise eps_theta(z, t, class_id).
Vec denoiser_forward(const DenoiserParams& params, const Vec& z, int t, int class_id);

/// Exact reverse-mode gradients of <forward(z,t,c), upstream> with respect
/// to every parameter and to z. Parameter gradients accumulate into grads.
Vec denoiser_backward(const DenoiserParams& params, const Vec& z, int t, int class_id,
                      const Vec& upstream, DenoiserGrads& grads);

// Checkpoint file: u64 little-endian header length, JSON header (dims +
// tensor names/shapes), then the flat little-endian f64 parameter array.
void save_checkpoint(const DenoiserParams& params, const std::filesystem::path& path);
DenoiserParams load_checkpoint(const std::filesystem::path& path);

}  // namespace ims3
