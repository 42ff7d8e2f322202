#pragma once

#include <filesystem>

#include "ims3/math.hpp"

namespace ims3 {

/// Variance-preserving diffusion noise schedule. Tables are indexed by
/// timestep t in {1..T}; the accessors extend to t = 0 with the clean-data
/// conventions alpha_bar(0) = 1 and sigma(0) = 0.
struct NoiseSchedule {
    int timesteps = 0;  // T
    Vec betas;          // beta_t,      length T
    Vec alpha_bars;     // alpha_bar_t, length T, strictly decreasing
    Vec sigmas;         // sigma_t,     length T, strictly increasing

    double beta(int t) const;
    double alpha_bar(int t) const;
    double sigma(int t) const;
};

/// Linear beta schedule with alpha_bar_t = prod_{s<=t}(1 - beta_s) and
/// sigma_t = sqrt((1 - alpha_bar_t) / alpha_bar_t).
NoiseSchedule build_linear_schedule(int timesteps, double beta_start, double beta_end);

/// Strictly increasing subset of {1..T} with n_steps entries ending at T,
/// near-uniformly spaced.
std::vector<int> timestep_grid(const NoiseSchedule& schedule, int n_steps);

/// Near-uniform grid {0 < t_1 < ... < t_n = t_target} used by inversion;
/// collapses duplicates when t_target < n_steps.
std::vector<int> inversion_grid(int t_target, int n_steps);

/// CSV dump with columns t, beta, alpha_bar, sigma.
void write_schedule_csv(const NoiseSchedule& schedule, const std::filesystem::path& path);

}  // namespace ims3
