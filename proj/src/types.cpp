#include "eio/types.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <utility>

namespace eio {

std::string to_string(DesignKind kind) {
    switch (kind) {
        case DesignKind::SineFeature: return "sine";
        case DesignKind::GaussianSpectrum: return "gaussian";
        case DesignKind::ExplicitCovariance: return "explicit";
    }
    return "unknown";
}

double sine_eigenvalue(Index k) {
    return 0.5 * std::pow(static_cast<double>(k), -0.25);
}

Matrix symmetrize(const Matrix& m) {
    return 0.5 * (m + m.transpose());
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw ValidationError(std::string(what) + " contains non-finite entries");
    }
}

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) {
        throw ValidationError(std::string(what) + " contains non-finite entries");
    }
}

DesignSpec DesignSpec::sine(Index dim, Vector theta_circ, double noise_std) {
    DesignSpec spec;
    spec.kind = DesignKind::SineFeature;
    spec.dim = dim;
    spec.theta_circ = std::move(theta_circ);
    spec.noise_std = noise_std;
    return spec;
}

DesignSpec DesignSpec::gaussian(Vector spectrum, Vector theta_circ, double noise_std,
                                std::optional<Matrix> eigvecs) {
    DesignSpec spec;
    spec.kind = DesignKind::GaussianSpectrum;
    spec.dim = spectrum.size();
    spec.spectrum = std::move(spectrum);
    spec.eigvecs = std::move(eigvecs);
    spec.theta_circ = std::move(theta_circ);
    spec.noise_std = noise_std;
    return spec;
}

DesignSpec DesignSpec::explicit_covariance(const Matrix& sigma, Vector theta_circ,
                                           double noise_std) {
    if (sigma.rows() != sigma.cols()) {
        throw DimensionMismatch("explicit covariance must be square");
    }
    require_finite(sigma, "covariance");
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(sigma));
    if (es.info() != Eigen::Success) {
        throw ValidationError("eigendecomposition of explicit covariance failed");
    }
    const Index d = sigma.rows();
    // Eigen returns ascending order; store nonincreasing.
    Vector spectrum(d);
    Matrix eigvecs(d, d);
    for (Index j = 0; j < d; ++j) {
        double ev = es.eigenvalues()(d - 1 - j);
        if (ev < 0.0) {
            if (ev < -1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff())) {
                throw ValidationError("explicit covariance is not positive semidefinite");
            }
            ev = 0.0;
        }
        spectrum(j) = ev;
        eigvecs.col(j) = es.eigenvectors().col(d - 1 - j);
    }
    DesignSpec spec;
    spec.kind = DesignKind::ExplicitCovariance;
    spec.dim = d;
    spec.spectrum = std::move(spectrum);
    spec.eigvecs = std::move(eigvecs);
    spec.theta_circ = std::move(theta_circ);
    spec.noise_std = noise_std;
    return spec;
}

ValidatedSpec validate_spec(const DesignSpec& input) {
    DesignSpec spec = input;
    if (spec.dim < 1) {
        throw DimensionMismatch("dim must be >= 1");
    }
    if (spec.theta_circ.size() != spec.dim) {
        throw DimensionMismatch("theta_circ length does not match dim");
    }
    require_finite(spec.theta_circ, "theta_circ");
    if (!(spec.noise_std >= 0.0) || !std::isfinite(spec.noise_std)) {
        throw ValidationError("noise_std must be finite and nonnegative");
    }

    if (spec.kind == DesignKind::SineFeature) {
        if (spec.eigvecs.has_value()) {
            throw KindMismatch("sine-feature design has a diagonal covariance; eigvecs not accepted");
        }
        // Derived, never stored independently.
        spec.spectrum.resize(spec.dim);
        for (Index k = 1; k <= spec.dim; ++k) {
            spec.spectrum(k - 1) = sine_eigenvalue(k);
        }
        return ValidatedSpec(std::move(spec));
    }

    if (spec.spectrum.size() != spec.dim) {
        throw DimensionMismatch("spectrum length does not match dim");
    }
    require_finite(spec.spectrum, "spectrum");
    for (Index k = 0; k < spec.dim; ++k) {
        if (spec.spectrum(k) < 0.0) {
            throw NonmonotoneSpectrum("spectrum must be nonnegative");
        }
        if (k > 0 && spec.spectrum(k) > spec.spectrum(k - 1)) {
            throw NonmonotoneSpectrum("spectrum must be nonincreasing");
        }
    }
    if (spec.eigvecs.has_value()) {
        const Matrix& v = *spec.eigvecs;
        if (v.rows() != spec.dim || v.cols() != spec.dim) {
            throw DimensionMismatch("eigvecs must be dim x dim");
        }
        require_finite(v, "eigvecs");
        const Matrix gram = v.transpose() * v;
        const double dev = (gram - Matrix::Identity(spec.dim, spec.dim)).cwiseAbs().maxCoeff();
        if (dev > 1e-10) {
            throw NonorthogonalEigvecs("eigvecs are not orthogonal: ||V^T V - I||_max = " +
                                       std::to_string(dev));
        }
    }
    return ValidatedSpec(std::move(spec));
}

void Dataset::validate() const {
    if (x.cols() != y.size()) {
        throw DimensionMismatch("dataset column count does not match response length");
    }
    if (y.size() < 1) {
        throw DimensionMismatch("dataset must contain at least one sample");
    }
    require_finite(x, "covariates");
    require_finite(y, "responses");
}

void Hyperparams::validate() const {
    if (!(mu > 0.0)) {
        throw ValidationError("mu must be positive (or the +inf sentinel)");
    }
    if (!(lambda >= 0.0) || std::isinf(lambda)) {
        throw ValidationError("lambda must be finite and nonnegative");
    }
    if (!(tau >= 0.0) || std::isinf(tau)) {
        throw ValidationError("tau must be finite and nonnegative");
    }
    if (max_iter < 1) {
        throw ValidationError("max_iter must be >= 1");
    }
    if (!(tol > 0.0)) {
        throw ValidationError("tol must be positive");
    }
}

void Triplet::validate() const {
    const Index d = theta.size();
    if (eta.size() != d || a.rows() != d || a.cols() != d) {
        throw DimensionMismatch("triplet components have inconsistent dimensions");
    }
    require_finite(theta, "theta");
    require_finite(eta, "eta");
    require_finite(a, "operator");
}

}  // namespace eio
