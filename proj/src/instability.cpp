#include "ims3/instability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ims3/csv.hpp"

namespace ims3 {

double instability_coefficient(const VectorMap& f, const Vec& z, double fd_step) {
    if (!(fd_step > 0.0)) throw Error("instability_coefficient: fd_step must be > 0");
    const std::size_t n = z.size();
    double log_sum = 0.0;
    Vec zp = z, zm = z;
    for (std::size_t i = 0; i < n; ++i) {
        zp[i] = z[i] + fd_step;
        zm[i] = z[i] - fd_step;
        const Vec fp = f(zp);
        const Vec fm = f(zm);
        zp[i] = z[i];
        zm[i] = z[i];
        double col_sq = 0.0;
        for (std::size_t k = 0; k < fp.size(); ++k) {
            const double c = (fp[k] - fm[k]) / (2.0 * fd_step);
            col_sq += c * c;
        }
        const double col_norm = std::sqrt(col_sq);
        if (!std::isfinite(col_norm) || col_norm <= 0.0)
            throw NonFiniteJacobian("instability_coefficient: bad Jacobian column");
        log_sum += std::log(col_norm);
    }
    return std::exp(log_sum / static_cast<double>(n));
}

InstabilityReport probe_flow(const NoiseSchedule& schedule, const EpsModel& model, int class_id,
                             int n_probes, int n_steps, int latent_dim, double fd_step, Rng& rng) {
    if (n_probes < 1) throw Error("probe_flow: n_probes < 1");
    const VectorMap flow = [&](const Vec& z) {
        return sample_from(schedule, model, z, class_id, n_steps);
    };
    InstabilityReport report;
    report.fd_step = fd_step;
    report.dim = latent_dim;
    report.probe_points.reserve(n_probes);
    report.coefficients.reserve(n_probes);
    for (int p = 0; p < n_probes; ++p) {
        Vec z = gaussian_sample(rng, static_cast<std::size_t>(latent_dim));
        report.coefficients.push_back(instability_coefficient(flow, z, fd_step));
        report.probe_points.push_back(std::move(z));
    }
    return report;
}

namespace {

double quantile(std::vector<double> sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

void write_instability_csv(const InstabilityReport& report, const std::filesystem::path& path) {
    CsvWriter csv(path, {"probe", "coefficient"});
    for (std::size_t i = 0; i < report.coefficients.size(); ++i)
        csv.row({std::to_string(i), format_double(report.coefficients[i])});
}

void write_instability_summary_json(const InstabilityReport& report, const std::filesystem::path& path) {
    std::vector<double> sorted = report.coefficients;
    std::sort(sorted.begin(), sorted.end());
    nlohmann::json j = {{"probes", sorted.size()},
                        {"dim", report.dim},
                        {"fd_step", report.fd_step},
                        {"min", sorted.front()},
                        {"q1", quantile(sorted, 0.25)},
                        {"median", quantile(sorted, 0.5)},
                        {"q3", quantile(sorted, 0.75)},
                        {"max", sorted.back()}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace ims3
