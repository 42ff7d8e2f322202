#include "ims3/data.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ims3/csv.hpp"

namespace ims3 {

std::vector<Vec> simplex_means(int classes, int dim, double scale) {
    if (classes < 1 || dim < classes) throw Error("simplex_means: need dim >= classes >= 1");
    const double center = 1.0 / static_cast<double>(classes);
    std::vector<Vec> means(classes, Vec(dim, 0.0));
    for (int i = 0; i < classes; ++i) {
        for (int j = 0; j < classes; ++j) means[i][j] = -scale * center;
        means[i][i] += scale;
    }
    return means;
}

std::pair<LabeledDataset, LabeledDataset> generate_gmm(const GmmSpec& spec, Rng& rng) {
    if (spec.class_count < 1 || static_cast<int>(spec.means.size()) != spec.class_count)
        throw Error("generate_gmm: bad spec");
    if (!(spec.cov_scale >= 0.0)) throw Error("generate_gmm: covariance scale must be >= 0");

    auto draw_split = [&](int per_class, const std::string& tag) {
        LabeledDataset out;
        out.split = tag;
        out.class_count = spec.class_count;
        for (int c = 0; c < spec.class_count; ++c) {
            for (int k = 0; k < per_class; ++k) {
                Vec x = spec.means[c];
                for (auto& xi : x) xi += spec.cov_scale * rng.normal();
                out.samples.push_back(std::move(x));
                out.labels.push_back(c);
            }
        }
        return out;
    };
    LabeledDataset train = draw_split(spec.n_train_per_class, "train");
    LabeledDataset test = draw_split(spec.n_test_per_class, "test");
    return {std::move(train), std::move(test)};
}

Vec FeatureExtractor::embed(const Vec& x) const { return normalize_to_sphere(net.hidden_activations(x)); }

FeatureExtractor fit_feature_extractor(const LabeledDataset& train, Rng& rng, const ClassifierConfig& cfg) {
    if (train.class_count < 2) throw Error("fit_feature_extractor: need >= 2 classes");
    FeatureExtractor fx;
    fx.net = train_classifier(train.samples, train.labels, train.class_count, cfg, rng);
    return fx;
}

LabeledDataset make_distilled(const std::vector<std::vector<Vec>>& subgroups_per_class, int ipc) {
    LabeledDataset out;
    out.split = "distilled";
    out.class_count = static_cast<int>(subgroups_per_class.size());
    for (int c = 0; c < out.class_count; ++c) {
        const auto& group = subgroups_per_class[c];
        if (static_cast<int>(group.size()) != ipc)
            throw Error("make_distilled: subgroup size does not match IPC");
        for (const auto& x : group) {
            out.samples.push_back(x);
            out.labels.push_back(c);
        }
    }
    return out;
}

void write_dataset_csv(const LabeledDataset& dataset, const std::filesystem::path& path) {
    const std::size_t dim = dataset.samples.empty() ? 0 : dataset.samples.front().size();
    std::vector<std::string> header{"label"};
    for (std::size_t j = 0; j < dim; ++j) header.push_back("x_" + std::to_string(j + 1));
    CsvWriter csv(path, header);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        std::vector<std::string> fields{std::to_string(dataset.labels[i])};
        for (double x : dataset.samples[i]) fields.push_back(format_double(x));
        csv.row(fields);
    }
}

LabeledDataset read_dataset_csv(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    LabeledDataset out;
    out.split = path.stem().string();
    int max_label = -1;
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) throw IoError("dataset csv: ragged row");
        const int label = static_cast<int>(parse_double(row[0]));
        Vec x;
        x.reserve(row.size() - 1);
        for (std::size_t j = 1; j < row.size(); ++j) x.push_back(parse_double(row[j]));
        out.samples.push_back(std::move(x));
        out.labels.push_back(label);
        max_label = std::max(max_label, label);
    }
    out.class_count = max_label + 1;
    return out;
}

void write_features_csv(const std::vector<int>& labels, const std::vector<Vec>& features,
                        const std::filesystem::path& path) {
    if (labels.size() != features.size()) throw ShapeMismatch("write_features_csv: size mismatch");
    const std::size_t dim = features.empty() ? 0 : features.front().size();
    std::vector<std::string> header{"label"};
    for (std::size_t j = 0; j < dim; ++j) header.push_back("f_" + std::to_string(j + 1));
    CsvWriter csv(path, header);
    for (std::size_t i = 0; i < features.size(); ++i) {
        std::vector<std::string> fields{std::to_string(labels[i])};
        for (double x : features[i]) fields.push_back(format_double(x));
        csv.row(fields);
    }
}

void save_extractor(const FeatureExtractor& fx, const std::filesystem::path& path) {
    nlohmann::json header;
    header["format"] = "ims3-extractor-v1";
    header["dims"] = {{"input_dim", fx.net.input_dim},
                      {"hidden_dim", fx.net.hidden_dim},
                      {"class_count", fx.net.class_count}};

    Vec flat;
    flat.insert(flat.end(), fx.net.w1.data.begin(), fx.net.w1.data.end());
    flat.insert(flat.end(), fx.net.b1.begin(), fx.net.b1.end());
    flat.insert(flat.end(), fx.net.w2.data.begin(), fx.net.w2.data.end());
    flat.insert(flat.end(), fx.net.b2.begin(), fx.net.b2.end());

    const std::string header_str = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string());
    const std::uint64_t header_len = header_str.size();
    char len_bytes[8];
    for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<char>((header_len >> (8 * i)) & 0xff);
    out.write(len_bytes, 8);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path.string());
}

FeatureExtractor load_extractor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char len_bytes[8];
    in.read(len_bytes, 8);
    if (!in) throw IoError("truncated extractor file: " + path.string());
    std::uint64_t header_len = 0;
    for (int i = 0; i < 8; ++i)
        header_len |= static_cast<std::uint64_t>(static_cast<unsigned char>(len_bytes[i])) << (8 * i);
    std::string header_str(header_len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(header_len));
    const auto header = nlohmann::json::parse(header_str);
    if (header.value("format", "") != "ims3-extractor-v1")
        throw IoError("unknown extractor format in " + path.string());

    FeatureExtractor fx;
    auto& net = fx.net;
    const auto& jd = header.at("dims");
    net.input_dim = jd.at("input_dim").get<int>();
    net.hidden_dim = jd.at("hidden_dim").get<int>();
    net.class_count = jd.at("class_count").get<int>();
    net.w1 = Mat(net.hidden_dim, net.input_dim);
    net.b1 = Vec(net.hidden_dim, 0.0);
    net.w2 = Mat(net.class_count, net.hidden_dim);
    net.b2 = Vec(net.class_count, 0.0);

    Vec flat(net.w1.size() + net.b1.size() + net.w2.size() + net.b2.size());
    in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!in) throw IoError("truncated extractor data: " + path.string());
    std::size_t off = 0;
    auto take = [&](Vec& dst) {
        std::copy(flat.begin() + off, flat.begin() + off + dst.size(), dst.begin());
        off += dst.size();
    };
    take(net.w1.data);
    take(net.b1);
    take(net.w2.data);
    take(net.b2);
    return fx;
}

}  // namespace ims3
