#include "ims3/schedule.hpp"

#include <cmath>

#include "ims3/csv.hpp"

namespace ims3 {

double NoiseSchedule::beta(int t) const {
    if (t < 1 || t > timesteps) throw BadTimestep("beta: t out of range");
    return betas[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha_bar(int t) const {
    if (t == 0) return 1.0;
    if (t < 0 || t > timesteps) throw BadTimestep("alpha_bar: t out of range");
    return alpha_bars[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::sigma(int t) const {
    if (t == 0) return 0.0;
    if (t < 0 || t > timesteps) throw BadTimestep("sigma: t out of range");
    return sigmas[static_cast<std::size_t>(t - 1)];
}

NoiseSchedule build_linear_schedule(int timesteps, double beta_start, double beta_end) {
    if (timesteps < 2) throw InvalidScheduleBounds("build_linear_schedule: need T >= 2");
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
        throw InvalidScheduleBounds("build_linear_schedule: need 0 < beta_start <= beta_end < 1");

    NoiseSchedule s;
    s.timesteps = timesteps;
    s.betas.resize(timesteps);
    s.alpha_bars.resize(timesteps);
    s.sigmas.resize(timesteps);

    double running = 1.0;
    for (int t = 0; t < timesteps; ++t) {
        const double beta =
            beta_start + (beta_end - beta_start) * static_cast<double>(t) / static_cast<double>(timesteps - 1);
        running *= 1.0 - beta;
        s.betas[t] = beta;
        s.alpha_bars[t] = running;
        s.sigmas[t] = std::sqrt((1.0 - running) / running);
    }
    return s;
}

std::vector<int> timestep_grid(const NoiseSchedule& schedule, int n_steps) {
    const int T = schedule.timesteps;
    if (n_steps < 1 || n_steps > T) throw InvalidStepCount("timestep_grid: need 1 <= n_steps <= T");
    std::vector<int> grid(n_steps);
    for (int k = 1; k <= n_steps; ++k)
        grid[k - 1] = static_cast<int>(std::llround(static_cast<double>(k) * T / n_steps));
    return grid;
}

std::vector<int> inversion_grid(int t_target, int n_steps) {
    if (t_target < 1) throw BadTimestep("inversion_grid: t_target < 1");
    if (n_steps < 1) throw InvalidStepCount("inversion_grid: n_steps < 1");
    std::vector<int> grid;
    grid.reserve(n_steps);
    int prev = 0;
    for (int k = 1; k <= n_steps; ++k) {
        int t = static_cast<int>(std::llround(static_cast<double>(k) * t_target / n_steps));
        if (t > prev) {
            grid.push_back(t);
            prev = t;
        }
    }
    return grid;
}

void write_schedule_csv(const NoiseSchedule& schedule, const std::filesystem::path& path) {
    CsvWriter csv(path, {"t", "beta", "alpha_bar", "sigma"});
    for (int t = 1; t <= schedule.timesteps; ++t)
        csv.row({format_double(t), format_double(schedule.beta(t)), format_double(schedule.alpha_bar(t)),
                 format_double(schedule.sigma(t))});
}

}  // namespace ims3
