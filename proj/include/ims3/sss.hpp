#pragma once

#include <filesystem>

#include "ims3/data.hpp"
#include "ims3/diffusion.hpp"

namespace ims3 {

/// Candidate subgroups for every class: G subgroups of K generated samples
/// each, kept both as raw latents (the distilled data) and as frozen-encoder
/// features, plus unit-sphere centroids and the real reference centroids.
struct CandidatePool {
    int class_count = 0;      // C
    int group_count = 0;      // G
    int group_size = 0;       // K
    int ref_sample_count = 0; // K_i used for the reference centroids

    std::vector<std::vector<std::vector<Vec>>> samples;   // [C][G][K] latents
    std::vector<std::vector<std::vector<Vec>>> features;  // [C][G][K] embeddings
    std::vector<std::vector<Vec>> centroids;              // [C][G], unit norm
    std::vector<Vec> real_centroids;                      // [C], unit norm
};

/// Chosen subgroup per class (0-based indices) with the objective value.
struct SelectionAssignment {
    std::vector<int> subgroup_indices;
    double objective_value = 0.0;
};

/// Unit-normalized mean of a seeded uniform subsample of k_i features.
Vec real_centroid(const std::vector<Vec>& features, int k_i, Rng& rng);

/// Unit-normalized mean of one subgroup's features.
Vec subgroup_centroid(const std::vector<Vec>& subgroup);

/// alpha * sum_i log(1 - sim(c_{i,g_i}, r_i))
///   - beta / ((C-1) G) * sum_i sum_{j != i} sum_g log(1 - sim(c_{i,g_i}, c_{j,g})),
/// with each (1 - sim) clamped to [1e-9, 2] before the log. The repulsion
/// term is an empty sum when C == 1.
double selection_objective(const CandidatePool& pool, const std::vector<int>& assignment, double alpha,
                           double beta);

/// Contribution of class i under choice g; the objective is sum_i of these
/// because the repulsion sum ranges over all candidate centroids of the
/// other classes, independent of their assignment.
double class_score(const CandidatePool& pool, int class_index, int group_index, double alpha, double beta);

/// Exact minimizer via independent per-class argmin; ties break toward the
/// smallest index.
SelectionAssignment select_greedy(const CandidatePool& pool, double alpha, double beta);

/// Exhaustive minimum over all G^C assignments (guarded at 10^6);
/// lexicographically smallest assignment wins ties.
SelectionAssignment select_bruteforce(const CandidatePool& pool, double alpha, double beta);

/// Samples G subgroups of K latents per class from the generator, embeds
/// them, and computes all centroids. Reference centroids use k_i real
/// features subsampled per class.
CandidatePool build_pool(const NoiseSchedule& schedule, const EpsModel& model,
                         const std::vector<std::vector<Vec>>& real_features_by_class,
                         const FeatureExtractor& fx, int group_count, int group_size, int ref_sample_count,
                         Rng& rng, int sample_steps, int latent_dim);

/// Selected raw-sample subgroups, ready for make_distilled.
std::vector<std::vector<Vec>> selected_subgroups(const CandidatePool& pool,
                                                 const SelectionAssignment& assignment);

// Pool directory layout: centroids.csv (reference rows use subgroup = -1),
// members.csv (features), samples.csv (latents), meta.json.
void write_pool(const CandidatePool& pool, const std::filesystem::path& dir);
CandidatePool read_pool(const std::filesystem::path& dir);

void write_assignment_json(const SelectionAssignment& assignment, const std::filesystem::path& path);

}  // namespace ims3
