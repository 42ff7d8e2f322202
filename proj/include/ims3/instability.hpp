#pragma once

#include <filesystem>
#include <functional>

#include "ims3/diffusion.hpp"

namespace ims3 {

using VectorMap = std::function<Vec(const Vec&)>;

/// Geometric mean of the Jacobian column norms of f at z, estimated by
/// central differences along the standard basis:
/// exp((1/n) sum_i log ||J e_i||). Values > 1 indicate local expansion.
double instability_coefficient(const VectorMap& f, const Vec& z, double fd_step);

struct InstabilityReport {
    std::vector<double> coefficients;
    std::vector<Vec> probe_points;
    double fd_step = 0.0;
    int dim = 0;
};

/// Probes the full deterministic sampling map (noise at T -> data at 0,
/// fixed n_steps grid) at Gaussian noise points.
InstabilityReport probe_flow(const NoiseSchedule& schedule, const EpsModel& model, int class_id,
                             int n_probes, int n_steps, int latent_dim, double fd_step, Rng& rng);

void write_instability_csv(const InstabilityReport& report, const std::filesystem::path& path);
void write_instability_summary_json(const InstabilityReport& report, const std::filesystem::path& path);

}  // namespace ims3
