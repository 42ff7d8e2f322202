#include "ims3/im_finetune.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ims3/csv.hpp"

namespace ims3 {

double loss_diff(const Vec& eps_pred, const Vec& eps) {
    if (eps_pred.size() != eps.size()) throw ShapeMismatch("loss_diff: dim mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double r = eps_pred[i] - eps[i];
        s += r * r;
    }
    return s;
}

double loss_im(const Vec& z_inv, const Vec& z_t) { return 1.0 - cosine_similarity(z_inv, z_t); }

double im_loss_value(ImLossKind kind, const Vec& z_inv, const Vec& z_t) {
    switch (kind) {
        case ImLossKind::Cosine:
            return loss_im(z_inv, z_t);
        case ImLossKind::L1: {
            double s = 0.0;
            for (std::size_t i = 0; i < z_inv.size(); ++i) s += std::abs(z_inv[i] - z_t[i]);
            return s / static_cast<double>(z_inv.size());
        }
        case ImLossKind::L2: {
            double s = 0.0;
            for (std::size_t i = 0; i < z_inv.size(); ++i) {
                const double r = z_inv[i] - z_t[i];
                s += r * r;
            }
            return s / static_cast<double>(z_inv.size());
        }
    }
    throw Error("im_loss_value: unknown kind");
}

Vec im_loss_grad(ImLossKind kind, const Vec& z_inv, const Vec& z_t) {
    if (z_inv.size() != z_t.size()) throw ShapeMismatch("im_loss_grad: dim mismatch");
    const std::size_t n = z_inv.size();
    Vec g(n, 0.0);
    switch (kind) {
        case ImLossKind::Cosine: {
            const double na = norm(z_inv);
            const double nb = norm(z_t);
            if (na < 1e-12 || nb < 1e-12) throw ZeroNormInput("im_loss_grad: zero-norm input");
            const double d = dot(z_inv, z_t);
            for (std::size_t i = 0; i < n; ++i)
                g[i] = -(z_t[i] / (na * nb) - d * z_inv[i] / (na * na * na * nb));
            return g;
        }
        case ImLossKind::L1: {
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double r = z_inv[i] - z_t[i];
                g[i] = (r > 0.0 ? inv_n : (r < 0.0 ? -inv_n : 0.0));
            }
            return g;
        }
        case ImLossKind::L2: {
            const double c = 2.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) g[i] = c * (z_inv[i] - z_t[i]);
            return g;
        }
    }
    throw Error("im_loss_grad: unknown kind");
}

double total_loss(double l_diff, double l_im, double lambda_im) {
    if (!std::isfinite(l_diff) || !std::isfinite(l_im)) throw NonFiniteLoss("total_loss: non-finite input");
    return l_diff + lambda_im * l_im;
}

namespace {

/// Reverse pass through the captured inversion trajectory. grad_z_inv is
/// d(loss)/d(z_inv) already scaled by lambda and the batch weight.
void accumulate_inversion_gradient(const DenoiserParams& params, const NoiseSchedule& schedule,
                                   const InversionTrajectory& traj, int label, const Vec& grad_z_inv,
                                   BackpropDepth depth, DenoiserGrads& grads) {
    const int t_target = traj.t_grid.back();
    // z_inv = sqrt(alpha_bar_target) * x_m
    Vec g_x = scaled(grad_z_inv, std::sqrt(schedule.alpha_bar(t_target)));
    for (std::size_t i = traj.t_grid.size(); i > 0; --i) {
        const int t_prev = (i >= 2) ? traj.t_grid[i - 2] : 0;
        const int t_next = traj.t_grid[i - 1];
        const int t_eval = std::max(t_prev, 1);
        const double dsigma = schedule.sigma(t_next) - schedule.sigma(t_prev);
        const double scale_prev = std::sqrt(schedule.alpha_bar(t_prev));
        const Vec v = scaled(traj.states[i - 1], scale_prev);
        const Vec upstream = scaled(g_x, dsigma);
        const Vec grad_v = denoiser_backward(params, v, t_eval, label, upstream, grads);
        if (depth == BackpropDepth::LastStepOnly) break;
        // x_i = x_{i-1} + dsigma * eps(scale_prev * x_{i-1})
        axpy(scale_prev, grad_v, g_x);
    }
}

}  // namespace

SampleLoss sample_loss(const DenoiserParams& params, const NoiseSchedule& schedule, const Vec& z0,
                       int label, int t, const Vec& eps, const IMFinetuneConfig& cfg) {
    const Vec z_t = forward_noise(schedule, z0, t, eps);
    const Vec eps_pred = denoiser_forward(params, z_t, t, label);
    SampleLoss out;
    out.diff = loss_diff(eps_pred, eps);
    if (cfg.lambda_im != 0.0) {
        const Vec z_inv = invert(schedule, make_eps_model(params), z0, t, label, cfg.n_inv_steps);
        out.im = im_loss_value(cfg.im_loss, z_inv, z_t);
    }
    out.total = total_loss(out.diff, out.im, cfg.lambda_im);
    return out;
}

SampleLoss sample_loss_gradient(const DenoiserParams& params, const NoiseSchedule& schedule, const Vec& z0,
                                int label, int t, const Vec& eps, const IMFinetuneConfig& cfg,
                                DenoiserGrads& grads, double grad_scale) {
    const Vec z_t = forward_noise(schedule, z0, t, eps);
    const Vec eps_pred = denoiser_forward(params, z_t, t, label);
    SampleLoss out;
    out.diff = loss_diff(eps_pred, eps);

    Vec upstream(eps_pred.size());
    for (std::size_t i = 0; i < upstream.size(); ++i)
        upstream[i] = grad_scale * 2.0 * (eps_pred[i] - eps[i]);
    denoiser_backward(params, z_t, t, label, upstream, grads);

    if (cfg.lambda_im != 0.0) {
        const auto traj =
            invert_with_trajectory(schedule, make_eps_model(params), z0, t, label, cfg.n_inv_steps);
        out.im = im_loss_value(cfg.im_loss, traj.z_inv, z_t);
        const Vec g = scaled(im_loss_grad(cfg.im_loss, traj.z_inv, z_t), grad_scale * cfg.lambda_im);
        accumulate_inversion_gradient(params, schedule, traj, label, g, cfg.backprop_depth, grads);
    }
    out.total = total_loss(out.diff, out.im, cfg.lambda_im);
    return out;
}

void finetune_epoch(DenoiserParams& params, AdamWState& opt, const NoiseSchedule& schedule,
                    const LatentBatch& real_data, const IMFinetuneConfig& cfg, int epoch_index, Rng& rng,
                    std::vector<BatchLossRow>& log) {
    if (real_data.t != 0) throw Error("finetune_epoch: real_data must hold clean latents (t = 0)");
    const std::size_t n = real_data.latents.size();
    if (n == 0) throw Error("finetune_epoch: empty dataset");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    const std::size_t batch_size = static_cast<std::size_t>(cfg.batch_size);
    int batch_index = 0;
    for (std::size_t start = 0; start < n; start += batch_size, ++batch_index) {
        const std::size_t end = std::min(start + batch_size, n);
        const double grad_scale = 1.0 / static_cast<double>(end - start);

        DenoiserGrads grads = zero_grads(params.dims);
        double sum_diff = 0.0, sum_im = 0.0, sum_total = 0.0;
        for (std::size_t k = start; k < end; ++k) {
            const std::size_t idx = order[k];
            const int t = rng.uniform_int(1, schedule.timesteps);
            const Vec eps = gaussian_sample(rng, real_data.latents[idx].size());
            const SampleLoss l = sample_loss_gradient(params, schedule, real_data.latents[idx],
                                                      real_data.labels[idx], t, eps, cfg, grads, grad_scale);
            if (!std::isfinite(l.total)) {
                std::ostringstream msg;
                msg << "finetune_epoch: non-finite loss at epoch " << epoch_index << " batch " << batch_index
                    << " sample " << idx << " (diff=" << l.diff << " im=" << l.im << ")";
                throw NonFiniteLoss(msg.str());
            }
            sum_diff += l.diff;
            sum_im += l.im;
            sum_total += l.total;
        }

        Vec flat = params.flatten();
        adamw_step(flat, grads.flatten(), opt);
        params.assign_from_flat(flat);

        const double inv_count = 1.0 / static_cast<double>(end - start);
        log.push_back({epoch_index, batch_index, sum_diff * inv_count, sum_im * inv_count,
                       sum_total * inv_count});
    }
}

std::vector<BatchLossRow> finetune(DenoiserParams& params, const NoiseSchedule& schedule,
                                   const LatentBatch& real_data, const IMFinetuneConfig& cfg, Rng& rng) {
    AdamWState opt(params.parameter_count(), cfg.lr);
    std::vector<BatchLossRow> log;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch)
        finetune_epoch(params, opt, schedule, real_data, cfg, epoch, rng, log);
    return log;
}

void write_training_log_csv(const std::vector<BatchLossRow>& log, const std::filesystem::path& path) {
    CsvWriter csv(path, {"epoch", "batch", "loss_diff", "loss_im", "total"});
    for (const auto& row : log)
        csv.row({std::to_string(row.epoch), std::to_string(row.batch), format_double(row.loss_diff),
                 format_double(row.loss_im), format_double(row.total)});
}

}  // namespace ims3
