#pragma once

#include <filesystem>
#include <functional>

#include "ims3/denoiser.hpp"
#include "ims3/schedule.hpp"

namespace ims3 {

/// Noise-prediction callable; lets tests swap in oracle or zero denoisers.
using EpsModel = std::function<Vec(const Vec& z, int t, int class_id)>;

EpsModel make_eps_model(const DenoiserParams& params);

/// Batch of latents with labels; t = 0 marks clean data.
struct LatentBatch {
    std::vector<Vec> latents;
    std::vector<int> labels;
    int t = 0;
};

void write_latents_csv(const LatentBatch& batch, const std::filesystem::path& path);

/// z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps.
Vec forward_noise(const NoiseSchedule& schedule, const Vec& z0, int t, const Vec& eps);

/// z0_hat = (z_t - sqrt(1 - alpha_bar_t) eps_theta) / sqrt(alpha_bar_t).
Vec predict_z0(const NoiseSchedule& schedule, const EpsModel& model, const Vec& z_t, int t, int class_id);

/// Deterministic DDIM update from t down to t_prev (t_prev may be 0).
Vec ddim_step(const NoiseSchedule& schedule, const EpsModel& model, const Vec& z_t, int t, int t_prev,
              int class_id);

/// Runs the DDIM sampler from a given noise latent at t = T down to 0
/// along an n_steps grid.
Vec sample_from(const NoiseSchedule& schedule, const EpsModel& model, Vec z, int class_id, int n_steps);

/// Draws z_T ~ N(0, I) and denoises it to a data-space sample.
Vec sample(const NoiseSchedule& schedule, const EpsModel& model, Rng& rng, int class_id, int n_steps,
           int latent_dim);

/// Euler inversion in sigma space. States x are the rescaled latents
/// x = z / sqrt(alpha_bar); the grid runs 0 = t_0 < t_1 < ... <= t_target.
struct InversionTrajectory {
    std::vector<int> t_grid;        // without the leading 0
    std::vector<Vec> states;        // x_0 .. x_m (sigma-space), size t_grid.size() + 1
    Vec z_inv;                      // sqrt(alpha_bar_target) * x_m
};

InversionTrajectory invert_with_trajectory(const NoiseSchedule& schedule, const EpsModel& model,
                                           const Vec& z0, int t_target, int class_id, int n_inv_steps);

Vec invert(const NoiseSchedule& schedule, const EpsModel& model, const Vec& z0, int t_target, int class_id,
           int n_inv_steps);

}  // namespace ims3
