#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "ims3/im_finetune.hpp"

namespace ims3 {

/// Every knob of one experiment. JSON round-trips through to_json /
/// parse_config; unknown keys are rejected to catch typos.
struct ExperimentConfig {
    std::uint64_t master_seed = 1;

    struct Gmm {
        int classes = 5;
        int dim = 8;
        double mean_scale = 4.0;
        double cov_scale = 1.0;
        int n_train_per_class = 500;
        int n_test_per_class = 100;
    } gmm;

    struct Schedule {
        int timesteps = 1000;
        double beta_start = 1e-4;
        double beta_end = 0.02;
    } schedule;

    struct Denoiser {
        int hidden_dim = 64;
        int class_emb_dim = 8;
        int time_freqs = 8;
    } denoiser;

    struct Pretrain {
        int epochs = 60;
        int batch_size = 32;
        double lr = 1e-3;
    } pretrain;

    IMFinetuneConfig finetune;

    struct Sampling {
        int steps = 20;
    } sampling;

    struct Sss {
        int groups = 8;
        int ipc = 10;
        int ref_samples = 100;
        double alpha = 0.5;
        double beta = 0.5;
    } sss;

    struct Eval {
        std::vector<std::uint64_t> seeds = {1, 2, 3};
        int epochs = 100;
        int hidden_dim = 32;
        int batch_size = 32;
        double lr = 0.01;
    } eval;

    struct Instability {
        int probes = 50;
        double fd_step = 1e-4;
        int steps = 20;
    } instability;

    ClassifierConfig eval_recipe() const;
};

std::string to_string(BackpropDepth depth);
std::string to_string(ImLossKind kind);
BackpropDepth backprop_depth_from_string(const std::string& s);
ImLossKind im_loss_from_string(const std::string& s);

/// Full canonical form: every field present, keys sorted.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Applies defaults for missing keys; throws ConfigError on unknown keys or
/// invalid values.
ExperimentConfig parse_config(const nlohmann::json& j);

ExperimentConfig load_config_file(const std::filesystem::path& path);

/// FNV-1a hash of the canonical JSON dump, as hex.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace ims3
