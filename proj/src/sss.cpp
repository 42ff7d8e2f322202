#include "ims3/sss.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "ims3/csv.hpp"

namespace ims3 {

namespace {

constexpr double kClampFloor = 1e-9;
constexpr double kClampCeil = 2.0;

double log_one_minus_sim(const Vec& a, const Vec& b, double clamp_floor = kClampFloor) {
    const double gap = std::clamp(1.0 - cosine_similarity(a, b), clamp_floor, kClampCeil);
    return std::log(gap);
}

Vec normalized_mean(const std::vector<Vec>& features) {
    if (features.empty()) throw Error("centroid of empty feature set");
    Vec mean(features.front().size(), 0.0);
    for (const auto& f : features) axpy(1.0, f, mean);
    for (auto& x : mean) x /= static_cast<double>(features.size());
    if (norm(mean) <= 1e-10) throw DegenerateCentroid("centroid mean has near-zero norm");
    return normalize_to_sphere(mean);
}

void check_assignment(const CandidatePool& pool, const std::vector<int>& assignment) {
    if (static_cast<int>(assignment.size()) != pool.class_count)
        throw ShapeMismatch("assignment length != class count");
    for (int g : assignment)
        if (g < 0 || g >= pool.group_count) throw Error("assignment index out of range");
}

}  // namespace

Vec real_centroid(const std::vector<Vec>& features, int k_i, Rng& rng) {
    if (k_i < 1) throw Error("real_centroid: k_i < 1");
    const std::size_t n = features.size();
    if (static_cast<std::size_t>(k_i) > n) throw Error("real_centroid: k_i exceeds available features");

    // Uniform subsample without replacement (partial Fisher-Yates).
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int j = 0; j < k_i; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(rng.uniform_below(n - j));
        std::swap(idx[j], idx[pick]);
    }
    std::vector<Vec> subset;
    subset.reserve(k_i);
    for (int j = 0; j < k_i; ++j) subset.push_back(features[idx[j]]);
    return normalized_mean(subset);
}

Vec subgroup_centroid(const std::vector<Vec>& subgroup) { return normalized_mean(subgroup); }

double class_score(const CandidatePool& pool, int class_index, int group_index, double alpha, double beta) {
    const Vec& c = pool.centroids[class_index][group_index];
    double score = alpha * log_one_minus_sim(c, pool.real_centroids[class_index]);
    if (pool.class_count > 1) {
        const double w = beta / (static_cast<double>(pool.class_count - 1) * pool.group_count);
        double repulsion = 0.0;
        for (int j = 0; j < pool.class_count; ++j) {
            if (j == class_index) continue;
            for (int g = 0; g < pool.group_count; ++g)
                repulsion += log_one_minus_sim(c, pool.centroids[j][g]);
        }
        score -= w * repulsion;
    }
    return score;
}

double selection_objective(const CandidatePool& pool, const std::vector<int>& assignment, double alpha,
                           double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0)) throw Error("selection_objective: need alpha, beta > 0");
    check_assignment(pool, assignment);
    double attract = 0.0;
    for (int i = 0; i < pool.class_count; ++i)
        attract += log_one_minus_sim(pool.centroids[i][assignment[i]], pool.real_centroids[i]);

    double repulsion = 0.0;
    if (pool.class_count > 1) {
        for (int i = 0; i < pool.class_count; ++i) {
            const Vec& ci = pool.centroids[i][assignment[i]];
            for (int j = 0; j < pool.class_count; ++j) {
                if (j == i) continue;
                for (int g = 0; g < pool.group_count; ++g)
                    repulsion += log_one_minus_sim(ci, pool.centroids[j][g]);
            }
        }
        repulsion *= beta / (static_cast<double>(pool.class_count - 1) * pool.group_count);
    }
    return alpha * attract - repulsion;
}

SelectionAssignment select_greedy(const CandidatePool& pool, double alpha, double beta) {
    SelectionAssignment out;
    out.subgroup_indices.resize(pool.class_count, 0);
    for (int i = 0; i < pool.class_count; ++i) {
        int best = 0;
        double best_score = class_score(pool, i, 0, alpha, beta);
        for (int g = 1; g < pool.group_count; ++g) {
            const double s = class_score(pool, i, g, alpha, beta);
            if (s < best_score) {
                best_score = s;
                best = g;
            }
        }
        out.subgroup_indices[i] = best;
    }
    out.objective_value = selection_objective(pool, out.subgroup_indices, alpha, beta);
    return out;
}

SelectionAssignment select_bruteforce(const CandidatePool& pool, double alpha, double beta) {
    double space = 1.0;
    for (int i = 0; i < pool.class_count; ++i) space *= pool.group_count;
    if (space > 1e6) throw SearchSpaceTooLarge("select_bruteforce: G^C exceeds 10^6");

    std::vector<int> current(pool.class_count, 0);
    SelectionAssignment best;
    best.subgroup_indices = current;
    best.objective_value = selection_objective(pool, current, alpha, beta);

    // Odometer enumeration in lexicographic order; strict improvement keeps
    // the lexicographically smallest argmin.
    while (true) {
        int pos = pool.class_count - 1;
        while (pos >= 0 && current[pos] == pool.group_count - 1) {
            current[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++current[pos];
        const double value = selection_objective(pool, current, alpha, beta);
        if (value < best.objective_value) {
            best.objective_value = value;
            best.subgroup_indices = current;
        }
    }
    return best;
}

CandidatePool build_pool(const NoiseSchedule& schedule, const EpsModel& model,
                         const std::vector<std::vector<Vec>>& real_features_by_class,
                         const FeatureExtractor& fx, int group_count, int group_size, int ref_sample_count,
                         Rng& rng, int sample_steps, int latent_dim) {
    if (group_count < 1 || group_size < 1) throw Error("build_pool: need G >= 1 and K >= 1");
    CandidatePool pool;
    pool.class_count = static_cast<int>(real_features_by_class.size());
    pool.group_count = group_count;
    pool.group_size = group_size;
    pool.ref_sample_count = ref_sample_count;
    pool.samples.resize(pool.class_count);
    pool.features.resize(pool.class_count);
    pool.centroids.resize(pool.class_count);
    pool.real_centroids.resize(pool.class_count);

    for (int c = 0; c < pool.class_count; ++c) {
        const int k_i = std::min<int>(ref_sample_count, static_cast<int>(real_features_by_class[c].size()));
        pool.real_centroids[c] = real_centroid(real_features_by_class[c], k_i, rng);

        pool.samples[c].resize(group_count);
        pool.features[c].resize(group_count);
        pool.centroids[c].resize(group_count);
        for (int g = 0; g < group_count; ++g) {
            auto& group_samples = pool.samples[c][g];
            auto& group_features = pool.features[c][g];
            group_samples.reserve(group_size);
            group_features.reserve(group_size);
            for (int k = 0; k < group_size; ++k) {
                Vec x = sample(schedule, model, rng, c, sample_steps, latent_dim);
                group_features.push_back(fx.embed(x));
                group_samples.push_back(std::move(x));
            }
            pool.centroids[c][g] = subgroup_centroid(group_features);
        }
    }
    return pool;
}

std::vector<std::vector<Vec>> selected_subgroups(const CandidatePool& pool,
                                                 const SelectionAssignment& assignment) {
    check_assignment(pool, assignment.subgroup_indices);
    std::vector<std::vector<Vec>> out;
    out.reserve(pool.class_count);
    for (int i = 0; i < pool.class_count; ++i)
        out.push_back(pool.samples[i][assignment.subgroup_indices[i]]);
    return out;
}

void write_pool(const CandidatePool& pool, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    const std::size_t feat_dim = pool.real_centroids.empty() ? 0 : pool.real_centroids.front().size();
    std::vector<std::string> cent_header{"class", "subgroup"};
    for (std::size_t j = 0; j < feat_dim; ++j) cent_header.push_back("c_" + std::to_string(j + 1));
    CsvWriter centroids(dir / "centroids.csv", cent_header);
    for (int i = 0; i < pool.class_count; ++i) {
        std::vector<std::string> row{std::to_string(i), "-1"};
        for (double x : pool.real_centroids[i]) row.push_back(format_double(x));
        centroids.row(row);
        for (int g = 0; g < pool.group_count; ++g) {
            std::vector<std::string> crow{std::to_string(i), std::to_string(g)};
            for (double x : pool.centroids[i][g]) crow.push_back(format_double(x));
            centroids.row(crow);
        }
    }

    auto write_members = [&](const std::vector<std::vector<std::vector<Vec>>>& data,
                             const std::filesystem::path& path, const std::string& prefix) {
        const std::size_t dim = data.empty() || data[0].empty() || data[0][0].empty()
                                    ? 0
                                    : data[0][0][0].size();
        std::vector<std::string> header{"class", "subgroup", "member"};
        for (std::size_t j = 0; j < dim; ++j) header.push_back(prefix + "_" + std::to_string(j + 1));
        CsvWriter csv(path, header);
        for (int i = 0; i < pool.class_count; ++i)
            for (int g = 0; g < pool.group_count; ++g)
                for (int k = 0; k < pool.group_size; ++k) {
                    std::vector<std::string> row{std::to_string(i), std::to_string(g), std::to_string(k)};
                    for (double x : data[i][g][k]) row.push_back(format_double(x));
                    csv.row(row);
                }
    };
    write_members(pool.features, dir / "members.csv", "f");
    write_members(pool.samples, dir / "samples.csv", "x");

    nlohmann::json meta = {{"class_count", pool.class_count},
                           {"group_count", pool.group_count},
                           {"group_size", pool.group_size},
                           {"ref_sample_count", pool.ref_sample_count}};
    std::ofstream meta_out(dir / "meta.json");
    meta_out << meta.dump(2) << "\n";
}

CandidatePool read_pool(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in) throw IoError("cannot open " + (dir / "meta.json").string());
    nlohmann::json meta = nlohmann::json::parse(meta_in);

    CandidatePool pool;
    pool.class_count = meta.at("class_count").get<int>();
    pool.group_count = meta.at("group_count").get<int>();
    pool.group_size = meta.at("group_size").get<int>();
    pool.ref_sample_count = meta.at("ref_sample_count").get<int>();
    pool.samples.assign(pool.class_count,
                        std::vector<std::vector<Vec>>(pool.group_count, std::vector<Vec>(pool.group_size)));
    pool.features.assign(pool.class_count,
                         std::vector<std::vector<Vec>>(pool.group_count, std::vector<Vec>(pool.group_size)));
    pool.centroids.assign(pool.class_count, std::vector<Vec>(pool.group_count));
    pool.real_centroids.assign(pool.class_count, Vec{});

    const CsvTable centroids = read_csv(dir / "centroids.csv");
    for (const auto& row : centroids.rows) {
        const int cls = static_cast<int>(parse_double(row[0]));
        const int g = static_cast<int>(parse_double(row[1]));
        Vec v;
        for (std::size_t j = 2; j < row.size(); ++j) v.push_back(parse_double(row[j]));
        if (g < 0)
            pool.real_centroids[cls] = std::move(v);
        else
            pool.centroids[cls][g] = std::move(v);
    }

    auto read_members = [&](std::vector<std::vector<std::vector<Vec>>>& data,
                            const std::filesystem::path& path) {
        const CsvTable table = read_csv(path);
        for (const auto& row : table.rows) {
            const int cls = static_cast<int>(parse_double(row[0]));
            const int g = static_cast<int>(parse_double(row[1]));
            const int k = static_cast<int>(parse_double(row[2]));
            Vec v;
            for (std::size_t j = 3; j < row.size(); ++j) v.push_back(parse_double(row[j]));
            data[cls][g][k] = std::move(v);
        }
    };
    read_members(pool.features, dir / "members.csv");
    read_members(pool.samples, dir / "samples.csv");
    return pool;
}

void write_assignment_json(const SelectionAssignment& assignment, const std::filesystem::path& path) {
    nlohmann::json j;
    j["subgroup_indices"] = assignment.subgroup_indices;
    j["objective"] = assignment.objective_value;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace ims3
