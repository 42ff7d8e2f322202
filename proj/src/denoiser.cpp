#include "ims3/denoiser.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace ims3 {

namespace {

template <typename P, typename F>
void for_each_tensor(P& params, F&& fn) {
    fn("w1", params.w1.data);
    fn("b1", params.b1);
    fn("w2", params.w2.data);
    fn("b2", params.b2);
    fn("w3", params.w3.data);
    fn("b3", params.b3);
    fn("class_emb", params.class_emb.data);
}

void check_inputs(const DenoiserParams& params, const Vec& z, int t, int class_id) {
    if (static_cast<int>(z.size()) != params.dims.latent_dim)
        throw ShapeMismatch("denoiser: latent dim mismatch");
    if (t < 1 || t > params.dims.t_max) throw BadTimestep("denoiser: t out of range");
    if (class_id < 0 || class_id >= params.dims.class_count)
        throw BadClassId("denoiser: class id out of range");
}

Vec assemble_input(const DenoiserParams& params, const Vec& z, int t, int class_id) {
    const auto& d = params.dims;
    Vec x;
    x.reserve(d.input_dim());
    x.insert(x.end(), z.begin(), z.end());
    const Vec tf = time_features(d, t);
    x.insert(x.end(), tf.begin(), tf.end());
    const std::size_t row = static_cast<std::size_t>(class_id) * d.class_emb_dim;
    x.insert(x.end(), params.class_emb.data.begin() + row,
             params.class_emb.data.begin() + row + d.class_emb_dim);
    return x;
}

}  // namespace

std::size_t DenoiserParams::parameter_count() const {
    std::size_t n = 0;
    for_each_tensor(*this, [&](const char*, const Vec& v) { n += v.size(); });
    return n;
}

Vec DenoiserParams::flatten() const {
    Vec flat;
    flat.reserve(parameter_count());
    for_each_tensor(*this, [&](const char*, const Vec& v) { flat.insert(flat.end(), v.begin(), v.end()); });
    return flat;
}

void DenoiserParams::assign_from_flat(const Vec& flat) {
    if (flat.size() != parameter_count()) throw ShapeMismatch("assign_from_flat: size mismatch");
    std::size_t off = 0;
    for_each_tensor(*this, [&](const char*, Vec& v) {
        std::copy(flat.begin() + off, flat.begin() + off + v.size(), v.begin());
        off += v.size();
    });
}

DenoiserParams init_denoiser(const DenoiserDims& dims, Rng& rng, double init_std) {
    DenoiserParams p;
    p.dims = dims;
    p.w1 = Mat(dims.hidden_dim, dims.input_dim());
    p.b1 = Vec(dims.hidden_dim, 0.0);
    p.w2 = Mat(dims.hidden_dim, dims.hidden_dim);
    p.b2 = Vec(dims.hidden_dim, 0.0);
    p.w3 = Mat(dims.latent_dim, dims.hidden_dim);
    p.b3 = Vec(dims.latent_dim, 0.0);
    p.class_emb = Mat(dims.class_count, dims.class_emb_dim);
    for (auto& x : p.w1.data) x = init_std * rng.normal();
    for (auto& x : p.w2.data) x = init_std * rng.normal();
    for (auto& x : p.w3.data) x = init_std * rng.normal();
    for (auto& x : p.class_emb.data) x = init_std * rng.normal();
    return p;
}

DenoiserGrads zero_grads(const DenoiserDims& dims) {
    DenoiserGrads g;
    g.dims = dims;
    g.w1 = Mat(dims.hidden_dim, dims.input_dim());
    g.b1 = Vec(dims.hidden_dim, 0.0);
    g.w2 = Mat(dims.hidden_dim, dims.hidden_dim);
    g.b2 = Vec(dims.hidden_dim, 0.0);
    g.w3 = Mat(dims.latent_dim, dims.hidden_dim);
    g.b3 = Vec(dims.latent_dim, 0.0);
    g.class_emb = Mat(dims.class_count, dims.class_emb_dim);
    return g;
}

Vec time_features(const DenoiserDims& dims, int t) {
    const double tau = static_cast<double>(t) / static_cast<double>(dims.t_max);
    Vec tf(dims.time_feature_dim());
    double omega = std::acos(-1.0);  // pi, doubled per frequency band
    for (int k = 0; k < dims.time_freqs; ++k) {
        tf[2 * k] = std::sin(omega * tau);
        tf[2 * k + 1] = std::cos(omega * tau);
        omega *= 2.0;
    }
    return tf;
}

Vec denoiser_forward(const DenoiserParams& params, const Vec& z, int t, int class_id) {
    check_inputs(params, z, t, class_id);
    const Vec x = assemble_input(params, z, t, class_id);
    Vec h1 = matvec(params.w1, x);
    for (std::size_t i = 0; i < h1.size(); ++i) h1[i] = std::tanh(h1[i] + params.b1[i]);
    Vec h2 = matvec(params.w2, h1);
    for (std::size_t i = 0; i < h2.size(); ++i) h2[i] = std::tanh(h2[i] + params.b2[i]);
    Vec out = matvec(params.w3, h2);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += params.b3[i];
    return out;
}

Vec denoiser_backward(const DenoiserParams& params, const Vec& z, int t, int class_id,
                      const Vec& upstream, DenoiserGrads& grads) {
    check_inputs(params, z, t, class_id);
    if (upstream.size() != z.size()) throw ShapeMismatch("denoiser_backward: upstream dim mismatch");

    const auto& d = params.dims;
    const Vec x = assemble_input(params, z, t, class_id);
    Vec h1 = matvec(params.w1, x);
    for (std::size_t i = 0; i < h1.size(); ++i) h1[i] = std::tanh(h1[i] + params.b1[i]);
    Vec h2 = matvec(params.w2, h1);
    for (std::size_t i = 0; i < h2.size(); ++i) h2[i] = std::tanh(h2[i] + params.b2[i]);

    // out = w3 h2 + b3
    axpy(1.0, upstream, grads.b3);
    add_outer(grads.w3, upstream, h2);
    Vec g2 = matvec_transposed(params.w3, upstream);
    for (std::size_t i = 0; i < g2.size(); ++i) g2[i] *= 1.0 - h2[i] * h2[i];

    axpy(1.0, g2, grads.b2);
    add_outer(grads.w2, g2, h1);
    Vec g1 = matvec_transposed(params.w2, g2);
    for (std::size_t i = 0; i < g1.size(); ++i) g1[i] *= 1.0 - h1[i] * h1[i];

    axpy(1.0, g1, grads.b1);
    add_outer(grads.w1, g1, x);
    const Vec gx = matvec_transposed(params.w1, g1);

    // Input gradient splits into the latent slice and the embedding row;
    // the time-feature slice has no parameters behind it.
    Vec grad_z(gx.begin(), gx.begin() + d.latent_dim);
    const std::size_t emb_off = static_cast<std::size_t>(d.latent_dim + d.time_feature_dim());
    const std::size_t row = static_cast<std::size_t>(class_id) * d.class_emb_dim;
    for (int j = 0; j < d.class_emb_dim; ++j) grads.class_emb.data[row + j] += gx[emb_off + j];
    return grad_z;
}

void save_checkpoint(const DenoiserParams& params, const std::filesystem::path& path) {
    nlohmann::json header;
    header["format"] = "ims3-checkpoint-v1";
    header["dims"] = {{"latent_dim", params.dims.latent_dim},   {"hidden_dim", params.dims.hidden_dim},
                      {"class_count", params.dims.class_count}, {"class_emb_dim", params.dims.class_emb_dim},
                      {"time_freqs", params.dims.time_freqs},   {"t_max", params.dims.t_max}};
    nlohmann::json tensors = nlohmann::json::array();
    tensors.push_back({{"name", "w1"}, {"shape", {params.dims.hidden_dim, params.dims.input_dim()}}});
    tensors.push_back({{"name", "b1"}, {"shape", {params.dims.hidden_dim}}});
    tensors.push_back({{"name", "w2"}, {"shape", {params.dims.hidden_dim, params.dims.hidden_dim}}});
    tensors.push_back({{"name", "b2"}, {"shape", {params.dims.hidden_dim}}});
    tensors.push_back({{"name", "w3"}, {"shape", {params.dims.latent_dim, params.dims.hidden_dim}}});
    tensors.push_back({{"name", "b3"}, {"shape", {params.dims.latent_dim}}});
    tensors.push_back({{"name", "class_emb"}, {"shape", {params.dims.class_count, params.dims.class_emb_dim}}});
    header["tensors"] = tensors;

    const std::string header_str = header.dump();
    const Vec flat = params.flatten();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string());
    const std::uint64_t header_len = header_str.size();
    char len_bytes[8];
    for (int i = 0; i < 8; ++i) len_bytes[i] = static_cast<char>((header_len >> (8 * i)) & 0xff);
    out.write(len_bytes, 8);
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!out) throw IoError("write failed: " + path.string());
}

DenoiserParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char len_bytes[8];
    in.read(len_bytes, 8);
    if (!in) throw IoError("truncated checkpoint: " + path.string());
    std::uint64_t header_len = 0;
    for (int i = 0; i < 8; ++i)
        header_len |= static_cast<std::uint64_t>(static_cast<unsigned char>(len_bytes[i])) << (8 * i);
    std::string header_str(header_len, '\0');
    in.read(header_str.data(), static_cast<std::streamsize>(header_len));
    if (!in) throw IoError("truncated checkpoint header: " + path.string());

    const auto header = nlohmann::json::parse(header_str);
    if (header.value("format", "") != "ims3-checkpoint-v1")
        throw IoError("unknown checkpoint format in " + path.string());
    DenoiserDims dims;
    const auto& jd = header.at("dims");
    dims.latent_dim = jd.at("latent_dim").get<int>();
    dims.hidden_dim = jd.at("hidden_dim").get<int>();
    dims.class_count = jd.at("class_count").get<int>();
    dims.class_emb_dim = jd.at("class_emb_dim").get<int>();
    dims.time_freqs = jd.at("time_freqs").get<int>();
    dims.t_max = jd.at("t_max").get<int>();

    DenoiserParams params = zero_grads(dims);
    Vec flat(params.parameter_count());
    in.read(reinterpret_cast<char*>(flat.data()), static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!in) throw IoError("truncated checkpoint data: " + path.string());
    params.assign_from_flat(flat);
    return params;
}

}  // namespace ims3
