#pragma once

#include "ims3/diffusion.hpp"

namespace ims3 {

/// How far the inversion-matching gradient flows back through the Euler
/// inversion trajectory. LastStepOnly freezes every state before the final
/// increment; FullTrajectory backpropagates through all of them.
enum class BackpropDepth { LastStepOnly, FullTrajectory };

/// Similarity loss used for inversion matching. Cosine is the default;
/// L1/L2 (per-dimension means) exist for the ablation.
enum class ImLossKind { Cosine, L1, L2 };

struct IMFinetuneConfig {
    double lambda_im = 0.002;
    int epochs = 8;
    int batch_size = 8;
    double lr = 1e-3;
    int n_inv_steps = 8;
    BackpropDepth backprop_depth = BackpropDepth::LastStepOnly;
    ImLossKind im_loss = ImLossKind::Cosine;
};

struct BatchLossRow {
    int epoch = 0;
    int batch = 0;
    double loss_diff = 0.0;
    double loss_im = 0.0;
    double total = 0.0;
};

/// Squared L2 norm of (eps_pred - eps).
double loss_diff(const Vec& eps_pred, const Vec& eps);

/// 1 - cosine_similarity(z_inv, z_t), in [0, 2].
double loss_im(const Vec& z_inv, const Vec& z_t);

double im_loss_value(ImLossKind kind, const Vec& z_inv, const Vec& z_t);
Vec im_loss_grad(ImLossKind kind, const Vec& z_inv, const Vec& z_t);

/// l_diff + lambda_im * l_im.
double total_loss(double l_diff, double l_im, double lambda_im);

struct SampleLoss {
    double diff = 0.0;
    double im = 0.0;
    double total = 0.0;
};

/// Loss of one (z0, label, t, eps) draw under the current parameters,
/// evaluated exactly as the training step sees it.
SampleLoss sample_loss(const DenoiserParams& params, const NoiseSchedule& schedule, const Vec& z0,
                       int label, int t, const Vec& eps, const IMFinetuneConfig& cfg);

/// Same, also accumulating grad_scale * d(total)/d(theta) into grads.
/// The diffusion term backpropagates through eps_theta(z_t, c); the
/// matching term flows through the inversion states per cfg.backprop_depth
/// (z_t itself carries no parameter dependence).
SampleLoss sample_loss_gradient(const DenoiserParams& params, const NoiseSchedule& schedule, const Vec& z0,
                                int label, int t, const Vec& eps, const IMFinetuneConfig& cfg,
                                DenoiserGrads& grads, double grad_scale);

/// One pass over real_data (t = 0 latents): per mini-batch draws t and eps,
/// averages sample gradients, applies one AdamW step. Appends one log row
/// per batch. Throws NonFiniteLoss with the offending batch in the message.
void finetune_epoch(DenoiserParams& params, AdamWState& opt, const NoiseSchedule& schedule,
                    const LatentBatch& real_data, const IMFinetuneConfig& cfg, int epoch_index, Rng& rng,
                    std::vector<BatchLossRow>& log);

/// cfg.epochs passes with a fresh AdamW state.
std::vector<BatchLossRow> finetune(DenoiserParams& params, const NoiseSchedule& schedule,
                                   const LatentBatch& real_data, const IMFinetuneConfig& cfg, Rng& rng);

void write_training_log_csv(const std::vector<BatchLossRow>& log, const std::filesystem::path& path);

}  // namespace ims3
