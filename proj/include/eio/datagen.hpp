#pragma once

#include "eio/types.hpp"

#include <cstdint>
#include <filesystem>

namespace eio {

// Counter-based stream: draw i is mix64(base(seed, stream_id) + i * phi).
// Identical (seed, stream_id) reproduce identical draws bit-for-bit on one
// platform, independent of what other streams do, so Monte-Carlo replicate r
// can own stream_id r and run on any worker.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    double uniform01();     // [0, 1), 53-bit resolution
    double uniform_sym();   // [-1, 1)
    double gaussian();      // standard normal (Box-Muller, pair cached)

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_;
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

// X_i = (k^{-1/8} sin(pi k xi_k))_{k=1..d} with xi_k i.i.d. Uniform[-1,1],
// fresh per sample; Y_i = X_i^T theta_circ + eps_i, eps_i ~ N(0, noise_std^2).
Dataset gen_sine_design(const ValidatedSpec& spec, Index n, RngStream& rng);

// X_i = V diag(sqrt(spectrum)) g_i with g_i standard normal.
Dataset gen_gaussian_design(const ValidatedSpec& spec, Index n, RngStream& rng);

// Dispatch on spec.kind (ExplicitCovariance has no sampler).
Dataset gen_design(const ValidatedSpec& spec, Index n, RngStream& rng);

// Exact population covariance of the design.
Matrix true_covariance(const ValidatedSpec& spec);

SufficientStats sufficient_stats(const Dataset& data);
// Also fills u = z - sigma_hat * theta_circ.
SufficientStats sufficient_stats(const Dataset& data, const ValidatedSpec& spec);

// Header `i,x_1..x_d,y`, 17 significant digits, LF line endings.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);

}  // namespace eio
