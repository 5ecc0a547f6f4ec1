#include "eio/datagen.hpp"

#include <cinttypes>
#include <cstdio>
#include <numbers>

namespace eio {

namespace {

constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    state_ = mix64(seed + kPhi) ^ mix64(stream_id * 0xD2B74407B1CE6E93ULL + kPhi);
}

std::uint64_t RngStream::next_u64() {
    state_ += kPhi;
    return mix64(state_);
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_sym() {
    return 2.0 * uniform01() - 1.0;
}

double RngStream::gaussian() {
    if (has_cached_gaussian_) {
        has_cached_gaussian_ = false;
        return cached_gaussian_;
    }
    // Box-Muller; u1 > 0 guaranteed by the offset.
    double u1 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_gaussian_ = r * std::sin(angle);
    has_cached_gaussian_ = true;
    return r * std::cos(angle);
}

Dataset gen_sine_design(const ValidatedSpec& spec, Index n, RngStream& rng) {
    if (spec.kind() != DesignKind::SineFeature) {
        throw KindMismatch("gen_sine_design requires a sine-feature spec");
    }
    if (n < 1) {
        throw ValidationError("sample size must be >= 1");
    }
    const Index d = spec.dim();
    Vector scale(d);
    for (Index k = 1; k <= d; ++k) {
        scale(k - 1) = std::pow(static_cast<double>(k), -0.125);
    }

    Dataset data;
    data.x.resize(d, n);
    data.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        for (Index k = 1; k <= d; ++k) {
            const double xi = rng.uniform_sym();
            data.x(k - 1, i) = scale(k - 1) * std::sin(std::numbers::pi * static_cast<double>(k) * xi);
        }
        const double eps = spec.noise_std() * rng.gaussian();
        data.y(i) = data.x.col(i).dot(spec.theta_circ()) + eps;
    }
    return data;
}

Dataset gen_gaussian_design(const ValidatedSpec& spec, Index n, RngStream& rng) {
    if (spec.kind() != DesignKind::GaussianSpectrum) {
        throw KindMismatch("gen_gaussian_design requires a Gaussian-spectrum spec");
    }
    if (n < 1) {
        throw ValidationError("sample size must be >= 1");
    }
    const Index d = spec.dim();
    const Vector root = spec.spectrum().cwiseSqrt();

    Dataset data;
    data.x.resize(d, n);
    data.y.resize(n);
    Vector g(d);
    for (Index i = 0; i < n; ++i) {
        for (Index k = 0; k < d; ++k) {
            g(k) = root(k) * rng.gaussian();
        }
        if (spec.eigvecs().has_value()) {
            data.x.col(i) = (*spec.eigvecs()) * g;
        } else {
            data.x.col(i) = g;
        }
        const double eps = spec.noise_std() * rng.gaussian();
        data.y(i) = data.x.col(i).dot(spec.theta_circ()) + eps;
    }
    return data;
}

Dataset gen_design(const ValidatedSpec& spec, Index n, RngStream& rng) {
    switch (spec.kind()) {
        case DesignKind::SineFeature: return gen_sine_design(spec, n, rng);
        case DesignKind::GaussianSpectrum: return gen_gaussian_design(spec, n, rng);
        case DesignKind::ExplicitCovariance:
            throw KindMismatch("no sampler for explicit-covariance specs");
    }
    throw KindMismatch("unknown design kind");
}

Matrix true_covariance(const ValidatedSpec& spec) {
    if (spec.eigvecs().has_value()) {
        return symmetrize(*spec.eigvecs() * spec.spectrum().asDiagonal() *
                          spec.eigvecs()->transpose());
    }
    return Matrix(spec.spectrum().asDiagonal());
}

SufficientStats sufficient_stats(const Dataset& data) {
    data.validate();
    const double inv_n = 1.0 / static_cast<double>(data.n());
    SufficientStats stats;
    stats.z = inv_n * (data.x * data.y);
    stats.sigma_hat = symmetrize(inv_n * (data.x * data.x.transpose()));
    return stats;
}

SufficientStats sufficient_stats(const Dataset& data, const ValidatedSpec& spec) {
    if (spec.dim() != data.dim()) {
        throw DimensionMismatch("spec dimension does not match dataset");
    }
    SufficientStats stats = sufficient_stats(data);
    stats.u = stats.z - stats.sigma_hat * spec.theta_circ();
    return stats;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
    data.validate();
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (f == nullptr) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    std::fputs("i", f);
    for (Index k = 1; k <= data.dim(); ++k) {
        std::fprintf(f, ",x_%" PRIdMAX, static_cast<std::intmax_t>(k));
    }
    std::fputs(",y\n", f);
    for (Index i = 0; i < data.n(); ++i) {
        std::fprintf(f, "%" PRIdMAX, static_cast<std::intmax_t>(i + 1));
        for (Index k = 0; k < data.dim(); ++k) {
            std::fprintf(f, ",%.17g", data.x(k, i));
        }
        std::fprintf(f, ",%.17g\n", data.y(i));
    }
    if (std::fclose(f) != 0) {
        throw IoError("failed to finalize " + path.string());
    }
}

}  // namespace eio
