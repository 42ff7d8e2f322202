#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ims3/errors.hpp"

namespace ims3 {

using Vec = std::vector<double>;

/// Dense row-major matrix.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return data.size(); }
};

/// Deterministic counter-free PRNG: xoshiro256++ seeded via splitmix64.
/// The integer stream is platform-independent; normal draws use the polar
/// Box-Muller transform and are bit-stable for a fixed libm.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal draw (polar Box-Muller; may consume a variable
    /// number of uniforms, keeps one spare).
    double normal();
    /// Unbiased uniform integer in [0, n).
    std::uint64_t uniform_below(std::uint64_t n);
    /// Uniform integer in [lo, hi], inclusive.
    int uniform_int(int lo, int hi);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Splits a master seed into an independent per-purpose stream seed.
std::uint64_t derive_seed(std::uint64_t master_seed, const std::string& tag);

/// FNV-1a 64-bit over raw bytes.
std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(const std::string& s);

// Basic dense kernels.
double dot(const Vec& a, const Vec& b);
double norm(const Vec& v);
void axpy(double a, const Vec& x, Vec& y);  // y += a*x
Vec scaled(const Vec& v, double a);
Vec matvec(const Mat& m, const Vec& x);
Vec matvec_transposed(const Mat& m, const Vec& x);
void add_outer(Mat& m, const Vec& a, const Vec& b);  // m += a b^T
bool all_finite(const Vec& v);

/// Cosine similarity clamped to [-1, 1]. Throws ZeroNormInput when either
/// norm is below 1e-12.
double cosine_similarity(const Vec& a, const Vec& b);

/// v / ||v||. Throws ZeroNormInput when ||v|| <= 1e-12.
Vec normalize_to_sphere(const Vec& v);

/// dim i.i.d. standard normal entries.
Vec gaussian_sample(Rng& rng, std::size_t dim);

/// AdamW optimizer state for one flat parameter vector
/// (decoupled weight decay, bias-corrected moments).
struct AdamWState {
    Vec first_moment;
    Vec second_moment;
    long step_count = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;

    AdamWState() = default;
    AdamWState(std::size_t n, double lr_, double weight_decay_ = 0.0)
        : first_moment(n, 0.0), second_moment(n, 0.0), lr(lr_), weight_decay(weight_decay_) {}
};

/// One AdamW update in place. Throws NonFiniteGradient on non-finite grads.
void adamw_step(Vec& params, const Vec& grads, AdamWState& state);

}  // namespace ims3
