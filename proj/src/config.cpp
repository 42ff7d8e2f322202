#include "ims3/config.hpp"

#include <fstream>
#include <sstream>

namespace ims3 {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("config section '" + section + "' must be an object");
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a) {
                known = true;
                break;
            }
        if (!known) throw ConfigError("unknown config key '" + key + "' in '" + section + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ClassifierConfig ExperimentConfig::eval_recipe() const {
    ClassifierConfig recipe;
    recipe.hidden_dim = eval.hidden_dim;
    recipe.epochs = eval.epochs;
    recipe.batch_size = eval.batch_size;
    recipe.lr = eval.lr;
    return recipe;
}

std::string to_string(BackpropDepth depth) {
    return depth == BackpropDepth::LastStepOnly ? "last_step_only" : "full_trajectory";
}

std::string to_string(ImLossKind kind) {
    switch (kind) {
        case ImLossKind::Cosine: return "cosine";
        case ImLossKind::L1: return "l1";
        case ImLossKind::L2: return "l2";
    }
    return "cosine";
}

BackpropDepth backprop_depth_from_string(const std::string& s) {
    if (s == "last_step_only") return BackpropDepth::LastStepOnly;
    if (s == "full_trajectory") return BackpropDepth::FullTrajectory;
    throw ConfigError("unknown backprop_depth '" + s + "'");
}

ImLossKind im_loss_from_string(const std::string& s) {
    if (s == "cosine") return ImLossKind::Cosine;
    if (s == "l1") return ImLossKind::L1;
    if (s == "l2") return ImLossKind::L2;
    throw ConfigError("unknown im_loss '" + s + "'");
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
    json j;
    j["master_seed"] = cfg.master_seed;
    j["gmm"] = {{"classes", cfg.gmm.classes},
                {"dim", cfg.gmm.dim},
                {"mean_scale", cfg.gmm.mean_scale},
                {"cov_scale", cfg.gmm.cov_scale},
                {"n_train_per_class", cfg.gmm.n_train_per_class},
                {"n_test_per_class", cfg.gmm.n_test_per_class}};
    j["schedule"] = {{"timesteps", cfg.schedule.timesteps},
                     {"beta_start", cfg.schedule.beta_start},
                     {"beta_end", cfg.schedule.beta_end}};
    j["denoiser"] = {{"hidden_dim", cfg.denoiser.hidden_dim},
                     {"class_emb_dim", cfg.denoiser.class_emb_dim},
                     {"time_freqs", cfg.denoiser.time_freqs}};
    j["pretrain"] = {{"epochs", cfg.pretrain.epochs},
                     {"batch_size", cfg.pretrain.batch_size},
                     {"lr", cfg.pretrain.lr}};
    j["finetune"] = {{"lambda_im", cfg.finetune.lambda_im},
                     {"epochs", cfg.finetune.epochs},
                     {"batch_size", cfg.finetune.batch_size},
                     {"lr", cfg.finetune.lr},
                     {"n_inv_steps", cfg.finetune.n_inv_steps},
                     {"backprop_depth", to_string(cfg.finetune.backprop_depth)},
                     {"im_loss", to_string(cfg.finetune.im_loss)}};
    j["sampling"] = {{"steps", cfg.sampling.steps}};
    j["sss"] = {{"groups", cfg.sss.groups},
                {"ipc", cfg.sss.ipc},
                {"ref_samples", cfg.sss.ref_samples},
                {"alpha", cfg.sss.alpha},
                {"beta", cfg.sss.beta}};
    j["eval"] = {{"seeds", cfg.eval.seeds},
                 {"epochs", cfg.eval.epochs},
                 {"hidden_dim", cfg.eval.hidden_dim},
                 {"batch_size", cfg.eval.batch_size},
                 {"lr", cfg.eval.lr}};
    j["instability"] = {{"probes", cfg.instability.probes},
                        {"fd_step", cfg.instability.fd_step},
                        {"steps", cfg.instability.steps}};
    return j;
}

ExperimentConfig parse_config(const nlohmann::json& j) {
    check_keys(j, "<root>",
               {"master_seed", "gmm", "schedule", "denoiser", "pretrain", "finetune", "sampling", "sss",
                "eval", "instability"});
    ExperimentConfig cfg;
    read(j, "master_seed", cfg.master_seed);

    if (j.contains("gmm")) {
        const auto& s = j.at("gmm");
        check_keys(s, "gmm",
                   {"classes", "dim", "mean_scale", "cov_scale", "n_train_per_class", "n_test_per_class"});
        read(s, "classes", cfg.gmm.classes);
        read(s, "dim", cfg.gmm.dim);
        read(s, "mean_scale", cfg.gmm.mean_scale);
        read(s, "cov_scale", cfg.gmm.cov_scale);
        read(s, "n_train_per_class", cfg.gmm.n_train_per_class);
        read(s, "n_test_per_class", cfg.gmm.n_test_per_class);
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        check_keys(s, "schedule", {"timesteps", "beta_start", "beta_end"});
        read(s, "timesteps", cfg.schedule.timesteps);
        read(s, "beta_start", cfg.schedule.beta_start);
        read(s, "beta_end", cfg.schedule.beta_end);
    }
    if (j.contains("denoiser")) {
        const auto& s = j.at("denoiser");
        check_keys(s, "denoiser", {"hidden_dim", "class_emb_dim", "time_freqs"});
        read(s, "hidden_dim", cfg.denoiser.hidden_dim);
        read(s, "class_emb_dim", cfg.denoiser.class_emb_dim);
        read(s, "time_freqs", cfg.denoiser.time_freqs);
    }
    if (j.contains("pretrain")) {
        const auto& s = j.at("pretrain");
        check_keys(s, "pretrain", {"epochs", "batch_size", "lr"});
        read(s, "epochs", cfg.pretrain.epochs);
        read(s, "batch_size", cfg.pretrain.batch_size);
        read(s, "lr", cfg.pretrain.lr);
    }
    if (j.contains("finetune")) {
        const auto& s = j.at("finetune");
        check_keys(s, "finetune",
                   {"lambda_im", "epochs", "batch_size", "lr", "n_inv_steps", "backprop_depth", "im_loss"});
        read(s, "lambda_im", cfg.finetune.lambda_im);
        read(s, "epochs", cfg.finetune.epochs);
        read(s, "batch_size", cfg.finetune.batch_size);
        read(s, "lr", cfg.finetune.lr);
        read(s, "n_inv_steps", cfg.finetune.n_inv_steps);
        if (s.contains("backprop_depth"))
            cfg.finetune.backprop_depth = backprop_depth_from_string(s.at("backprop_depth").get<std::string>());
        if (s.contains("im_loss")) cfg.finetune.im_loss = im_loss_from_string(s.at("im_loss").get<std::string>());
    }
    if (j.contains("sampling")) {
        const auto& s = j.at("sampling");
        check_keys(s, "sampling", {"steps"});
        read(s, "steps", cfg.sampling.steps);
    }
    if (j.contains("sss")) {
        const auto& s = j.at("sss");
        check_keys(s, "sss", {"groups", "ipc", "ref_samples", "alpha", "beta"});
        read(s, "groups", cfg.sss.groups);
        read(s, "ipc", cfg.sss.ipc);
        read(s, "ref_samples", cfg.sss.ref_samples);
        read(s, "alpha", cfg.sss.alpha);
        read(s, "beta", cfg.sss.beta);
    }
    if (j.contains("eval")) {
        const auto& s = j.at("eval");
        check_keys(s, "eval", {"seeds", "epochs", "hidden_dim", "batch_size", "lr"});
        read(s, "seeds", cfg.eval.seeds);
        read(s, "epochs", cfg.eval.epochs);
        read(s, "hidden_dim", cfg.eval.hidden_dim);
        read(s, "batch_size", cfg.eval.batch_size);
        read(s, "lr", cfg.eval.lr);
    }
    if (j.contains("instability")) {
        const auto& s = j.at("instability");
        check_keys(s, "instability", {"probes", "fd_step", "steps"});
        read(s, "probes", cfg.instability.probes);
        read(s, "fd_step", cfg.instability.fd_step);
        read(s, "steps", cfg.instability.steps);
    }

    if (!(cfg.sss.alpha > 0.0) || !(cfg.sss.beta > 0.0))
        throw ConfigError("sss.alpha and sss.beta must be > 0");
    if (cfg.sss.ipc < 1) throw ConfigError("sss.ipc must be >= 1");
    if (cfg.gmm.classes < 1 || cfg.gmm.dim < cfg.gmm.classes)
        throw ConfigError("gmm requires dim >= classes >= 1");
    if (cfg.schedule.timesteps < 2) throw ConfigError("schedule.timesteps must be >= 2");
    if (cfg.eval.seeds.empty()) throw ConfigError("eval.seeds must not be empty");
    if (cfg.finetune.lambda_im < 0.0) throw ConfigError("finetune.lambda_im must be >= 0");
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string dump = to_json(cfg).dump();
    std::ostringstream hex;
    hex << std::hex << fnv1a64(dump);
    return hex.str();
}

}  // namespace ims3
