#include "ims3/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "ims3/csv.hpp"

namespace ims3 {

EpsModel make_eps_model(const DenoiserParams& params) {
    return [&params](const Vec& z, int t, int class_id) { return denoiser_forward(params, z, t, class_id); };
}

void write_latents_csv(const LatentBatch& batch, const std::filesystem::path& path) {
    const std::size_t dim = batch.latents.empty() ? 0 : batch.latents.front().size();
    std::vector<std::string> header{"label"};
    for (std::size_t j = 0; j < dim; ++j) header.push_back("z_" + std::to_string(j + 1));
    CsvWriter csv(path, header);
    for (std::size_t i = 0; i < batch.latents.size(); ++i) {
        std::vector<std::string> fields{std::to_string(batch.labels[i])};
        for (double x : batch.latents[i]) fields.push_back(format_double(x));
        csv.row(fields);
    }
}

Vec forward_noise(const NoiseSchedule& schedule, const Vec& z0, int t, const Vec& eps) {
    if (t < 1 || t > schedule.timesteps) throw BadTimestep("forward_noise: t out of range");
    if (z0.size() != eps.size()) throw ShapeMismatch("forward_noise: dim mismatch");
    const double ab = schedule.alpha_bar(t);
    const double sa = std::sqrt(ab);
    const double sb = std::sqrt(1.0 - ab);
    Vec out(z0.size());
    for (std::size_t i = 0; i < z0.size(); ++i) out[i] = sa * z0[i] + sb * eps[i];
    return out;
}

Vec predict_z0(const NoiseSchedule& schedule, const EpsModel& model, const Vec& z_t, int t, int class_id) {
    if (t < 1 || t > schedule.timesteps) throw BadTimestep("predict_z0: t out of range");
    const double ab = schedule.alpha_bar(t);
    const double sa = std::sqrt(ab);
    const double sb = std::sqrt(1.0 - ab);
    const Vec eps = model(z_t, t, class_id);
    Vec out(z_t.size());
    for (std::size_t i = 0; i < z_t.size(); ++i) out[i] = (z_t[i] - sb * eps[i]) / sa;
    return out;
}

Vec ddim_step(const NoiseSchedule& schedule, const EpsModel& model, const Vec& z_t, int t, int t_prev,
              int class_id) {
    if (t_prev >= t) throw BadTimestepOrder("ddim_step: need t_prev < t");
    if (t_prev < 0) throw BadTimestep("ddim_step: t_prev < 0");
    if (t > schedule.timesteps) throw BadTimestep("ddim_step: t out of range");
    const double ab_prev = schedule.alpha_bar(t_prev);
    const double sa_prev = std::sqrt(ab_prev);
    const double sb_prev = std::sqrt(1.0 - ab_prev);
    const Vec eps = model(z_t, t, class_id);
    const Vec z0_hat = [&] {
        const double ab = schedule.alpha_bar(t);
        const double sa = std::sqrt(ab);
        const double sb = std::sqrt(1.0 - ab);
        Vec out(z_t.size());
        for (std::size_t i = 0; i < z_t.size(); ++i) out[i] = (z_t[i] - sb * eps[i]) / sa;
        return out;
    }();
    Vec out(z_t.size());
    for (std::size_t i = 0; i < z_t.size(); ++i) out[i] = sa_prev * z0_hat[i] + sb_prev * eps[i];
    return out;
}

Vec sample_from(const NoiseSchedule& schedule, const EpsModel& model, Vec z, int class_id, int n_steps) {
    const std::vector<int> grid = timestep_grid(schedule, n_steps);
    for (std::size_t k = grid.size(); k > 0; --k) {
        const int t = grid[k - 1];
        const int t_prev = (k >= 2) ? grid[k - 2] : 0;
        z = ddim_step(schedule, model, z, t, t_prev, class_id);
    }
    return z;
}

Vec sample(const NoiseSchedule& schedule, const EpsModel& model, Rng& rng, int class_id, int n_steps,
           int latent_dim) {
    if (n_steps < 1) throw InvalidStepCount("sample: n_steps < 1");
    Vec z = gaussian_sample(rng, static_cast<std::size_t>(latent_dim));
    return sample_from(schedule, model, std::move(z), class_id, n_steps);
}

InversionTrajectory invert_with_trajectory(const NoiseSchedule& schedule, const EpsModel& model,
                                           const Vec& z0, int t_target, int class_id, int n_inv_steps) {
    if (t_target < 1 || t_target > schedule.timesteps) throw BadTimestep("invert: t_target out of range");
    if (n_inv_steps < 1) throw InvalidStepCount("invert: n_inv_steps < 1");

    InversionTrajectory traj;
    traj.t_grid = inversion_grid(t_target, n_inv_steps);
    traj.states.reserve(traj.t_grid.size() + 1);
    traj.states.push_back(z0);  // x at sigma_0 = 0 equals z0 since alpha_bar(0) = 1

    int t_prev = 0;
    Vec x = z0;
    for (int t_next : traj.t_grid) {
        // Network evaluation at the variance-preserving rescale of the
        // current state; the first step (t_prev = 0) evaluates at t = 1.
        const int t_eval = std::max(t_prev, 1);
        const Vec v = scaled(x, std::sqrt(schedule.alpha_bar(t_prev)));
        const Vec eps = model(v, t_eval, class_id);
        const double dsigma = schedule.sigma(t_next) - schedule.sigma(t_prev);
        axpy(dsigma, eps, x);
        traj.states.push_back(x);
        t_prev = t_next;
    }
    traj.z_inv = scaled(x, std::sqrt(schedule.alpha_bar(t_target)));
    return traj;
}

Vec invert(const NoiseSchedule& schedule, const EpsModel& model, const Vec& z0, int t_target, int class_id,
           int n_inv_steps) {
    return invert_with_trajectory(schedule, model, z0, t_target, class_id, n_inv_steps).z_inv;
}

}  // namespace ims3
