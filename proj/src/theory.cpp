#include "eio/theory.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace eio {

namespace {

void check_spectrum(const Vector& spectrum) {
    for (Index k = 0; k < spectrum.size(); ++k) {
        if (spectrum(k) < 0.0 || (k > 0 && spectrum(k) > spectrum(k - 1))) {
            throw NonmonotoneSpectrum("spectrum must be nonincreasing and nonnegative");
        }
    }
}

Index k_star_scan(const Vector& spectrum, double lambda) {
    const double threshold = 2.0 * lambda;
    Index k_star = 0;
    for (Index k = 0; k < spectrum.size(); ++k) {
        if (spectrum(k) * spectrum(k) >= threshold) {
            k_star = k + 1;
        } else {
            break;  // spectrum nonincreasing
        }
    }
    return k_star;
}

}  // namespace

void BoundConfig::validate() const {
    if (!(c_x > 0.0) || !(sigma_psi1 >= 0.0)) {
        throw ValidationError("bound constants must be positive (sigma_psi1 nonnegative)");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ValidationError("delta must lie in (0, 1)");
    }
}

double operator_norm_sym(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error("eigenvalue computation failed");
    }
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double sigma_half_norm(const Matrix& sigma, const Vector& v) {
    const double q = v.dot(sigma * v);
    return std::sqrt(std::max(q, 0.0));
}

Vector eigenvalues_desc(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error("eigenvalue computation failed");
    }
    return es.eigenvalues().reverse();
}

Vector bias_leading_term(const Matrix& sigma, const Vector& theta_circ, double lambda) {
    if (sigma.rows() != theta_circ.size() || sigma.cols() != theta_circ.size()) {
        throw DimensionMismatch("sigma and theta_circ dimensions disagree");
    }
    if (!(lambda >= 0.0)) {
        throw ValidationError("lambda must be nonnegative");
    }
    if (lambda == 0.0) {
        return Vector::Zero(theta_circ.size());
    }
    Matrix m = 0.5 * (sigma * sigma);
    m.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(symmetrize(m));
    if (llt.info() != Eigen::Success) {
        throw SingularSystem("Sigma^2/2 + lambda I is not positive definite");
    }
    return -lambda * llt.solve(theta_circ);
}

VarianceLeadingTerm variance_leading_term(const Matrix& sigma, const Matrix& sigma_hat,
                                          const Vector& u, const Vector& b_lambda,
                                          double lambda) {
    const Index d = sigma.rows();
    if (sigma_hat.rows() != d || u.size() != d || b_lambda.size() != d) {
        throw DimensionMismatch("variance_leading_term operands have inconsistent dimensions");
    }
    const Matrix delta = sigma_hat - sigma;
    VarianceLeadingTerm out;
    out.zeta = sigma * u - sigma * (delta * b_lambda) - delta * (sigma * b_lambda);
    Matrix m = sigma * sigma;
    m.diagonal().array() += 2.0 * lambda;
    Eigen::LLT<Matrix> llt(symmetrize(m));
    if (llt.info() != Eigen::Success) {
        throw SingularSystem("Sigma^2 + 2 lambda I is not positive definite");
    }
    out.zeta_tilde = llt.solve(out.zeta);
    return out;
}

double excess_risk(const Matrix& sigma, const Vector& theta_hat, const Vector& theta_circ) {
    if (sigma.rows() != theta_hat.size() || theta_circ.size() != theta_hat.size()) {
        throw DimensionMismatch("excess_risk operands have inconsistent dimensions");
    }
    const Vector diff = theta_hat - theta_circ;
    return std::max(diff.dot(sigma * diff), 0.0);
}

double tail_ratio_sum(const Vector& spectrum, Index k, double q) {
    check_spectrum(spectrum);
    if (k < 0) {
        throw ValidationError("k must be nonnegative");
    }
    const Index d = spectrum.size();
    if (k >= d) {
        return 0.0;
    }
    const double ref = spectrum(k);
    if (ref <= 0.0) {
        return 0.0;  // all remaining eigenvalues are zero
    }
    double sum = 0.0;
    for (Index j = k; j < d; ++j) {
        sum += std::pow(spectrum(j) / ref, q);
    }
    return sum;
}

SpectralSummary spectral_summary(const Vector& spectrum, double lambda) {
    check_spectrum(spectrum);
    if (!(lambda >= 0.0)) {
        throw ValidationError("lambda must be nonnegative");
    }
    SpectralSummary out;
    if (spectrum.size() > 0 && spectrum(0) > 0.0) {
        out.eff_rank = spectrum.sum() / spectrum(0);
    }
    out.k_star = k_star_scan(spectrum, lambda);
    out.r2 = tail_ratio_sum(spectrum, out.k_star, 2.0);
    out.r4 = tail_ratio_sum(spectrum, out.k_star, 4.0);
    return out;
}

double psi_bound(Index n, const BoundConfig& cfg, const Matrix& sigma,
                 const Vector& theta_circ) {
    cfg.validate();
    if (n < 1) {
        throw ValidationError("n must be >= 1");
    }
    const double theta_norm = theta_circ.norm();
    if (theta_norm == 0.0) {
        throw ZeroTheta("psi_bound requires ||theta_circ|| > 0");
    }
    const double op = operator_norm_sym(sigma);
    const double eff_rank = op > 0.0 ? sigma.trace() / op : 0.0;
    const double base = cfg.sigma_psi1 * std::sqrt(op) / theta_norm + 2.0 * cfg.c_x * op;
    return 196.0 * base * base * (eff_rank * eff_rank + std::log(4.0 / cfg.delta)) /
           static_cast<double>(n);
}

double diamond_remainder(Index n, const BoundConfig& cfg, const Matrix& sigma,
                         const Vector& theta_circ, double mu, double lambda) {
    cfg.validate();
    if (!(mu > 0.0)) {
        throw ValidationError("mu must be positive");
    }
    if (!(lambda > 0.0)) {
        throw ValidationError("lambda must be positive");
    }
    const Vector b = bias_leading_term(sigma, theta_circ, lambda);
    const double b_norm = b.norm();
    const double theta_norm = theta_circ.norm();
    const double op = operator_norm_sym(sigma);
    const double psi = psi_bound(n, cfg, sigma, theta_circ);

    const double first =
        210.0 * (theta_norm / mu + op * b_norm / (mu * std::sqrt(lambda))) * std::sqrt(op) * b_norm;
    const double ratio = 17.0 * theta_norm / mu;
    const double second = theta_norm / std::pow(lambda, 0.25) *
                          (ratio * ratio + b_norm / (160.0 * mu)) * std::sqrt(psi);
    const double third = 19.0 * theta_norm / (std::sqrt(3.0) * std::pow(lambda, 0.75)) *
                         (1.0 + std::sqrt(psi / lambda)) * psi;
    return first + second + third;
}

double risk_bound_rhs(Index n, const BoundConfig& cfg, const Matrix& sigma,
                      const Vector& theta_circ, double mu, double lambda) {
    const Vector b = bias_leading_term(sigma, theta_circ, lambda);
    const double s12b = sigma_half_norm(sigma, b);
    const double s32b = sigma_half_norm(sigma, sigma * b);
    const Vector spectrum = eigenvalues_desc(sigma);
    const SpectralSummary ss = spectral_summary(spectrum.cwiseMax(0.0), lambda);
    const double log_term = std::log(4.0 / cfg.delta);
    const double nn = static_cast<double>(n);
    const double ks = static_cast<double>(ss.k_star);

    const double noise_term = 4.0 * (2.0 * cfg.sigma_psi1 + cfg.c_x * s12b) *
                              std::sqrt((ks + ss.r4 + log_term) / nn);
    const double design_term = 2.0 * cfg.c_x * s32b / std::sqrt(2.0 * lambda) *
                               std::sqrt((4.0 * ks + 4.0 * ss.r2 + log_term) / nn);
    return s12b + noise_term + design_term +
           diamond_remainder(n, cfg, sigma, theta_circ, mu, lambda);
}

ConcentrationBound concentration_bound_cov(const Matrix& a, const Matrix& b,
                                           const Matrix& sigma, const BoundConfig& cfg,
                                           Index n) {
    cfg.validate();
    if (a.cols() != sigma.rows() || b.cols() != sigma.rows()) {
        throw DimensionMismatch("A and B must act on the covariate space");
    }
    if (n < 1) {
        throw ValidationError("n must be >= 1");
    }
    // ||A Sigma^{1/2}|| and r(Sigma^{1/2} A^T A Sigma^{1/2}) through the
    // similar matrix A Sigma A^T (same nonzero spectrum, no square root).
    const Matrix ma = symmetrize(a * sigma * a.transpose());
    const Matrix mb = symmetrize(b * sigma * b.transpose());
    const double la = std::max(operator_norm_sym(ma), 0.0);
    const double lb = std::max(operator_norm_sym(mb), 0.0);
    const double ra = la > 0.0 ? ma.trace() / la : 0.0;
    const double rb = lb > 0.0 ? mb.trace() / lb : 0.0;
    const double log_term = std::log(2.0 / cfg.delta);

    ConcentrationBound out;
    out.value = 4.0 * cfg.c_x * std::sqrt(la) * std::sqrt(lb) *
                std::sqrt((ra * rb + log_term) / static_cast<double>(n));
    out.precondition_ok = ra * rb + log_term <= 4.0 * static_cast<double>(n);
    return out;
}

ConcentrationBound concentration_bound_noise(const Matrix& b, const Matrix& sigma,
                                             const BoundConfig& cfg, Index n) {
    cfg.validate();
    if (b.cols() != sigma.rows()) {
        throw DimensionMismatch("B must act on the covariate space");
    }
    if (n < 1) {
        throw ValidationError("n must be >= 1");
    }
    const Matrix mb = symmetrize(b * sigma * b.transpose());
    const double lb = std::max(operator_norm_sym(mb), 0.0);
    const double rb = lb > 0.0 ? mb.trace() / lb : 0.0;
    const double log_term = std::log(2.0 / cfg.delta);

    ConcentrationBound out;
    out.value = 8.0 * cfg.sigma_psi1 * std::sqrt(lb) *
                std::sqrt((rb + log_term) / static_cast<double>(n));
    out.precondition_ok = rb + log_term <= static_cast<double>(n);
    return out;
}

BiasNormBounds bias_norm_bounds(const Vector& spectrum, const Vector& theta_circ_coords,
                                double lambda, double tau) {
    check_spectrum(spectrum);
    if (spectrum.size() != theta_circ_coords.size()) {
        throw DimensionMismatch("spectrum and coordinate dimensions disagree");
    }
    if (!(lambda >= 0.0) || !(tau >= 0.0)) {
        throw ValidationError("lambda and tau must be nonnegative");
    }
    if (std::abs(tau * tau - 2.0 * lambda) > 1e-12 * std::max(1.0, 2.0 * lambda)) {
        throw TauLambdaMismatch("ridge envelope requires tau^2 = 2 lambda");
    }

    const Index d = spectrum.size();
    const Index k_star = k_star_scan(spectrum, lambda);
    const double sigma_ks = k_star > 0 ? spectrum(k_star - 1) : 0.0;

    double sqrt_sigma_sq = 0.0;   // ||Sigma^{1/2} b||^2
    double sigma_cubed_sq = 0.0;  // ||Sigma^{3/2} b||^2
    double head_inv = 0.0;        // ||Sigma^{-1/2} theta_{<=k*}||^2
    double tail_fwd = 0.0;        // ||Sigma^{1/2} theta_{>k*}||^2
    double envelope = 0.0;        // ||Sigma^{1/2} (Sigma + tau I)^{-1} theta||^2

    for (Index k = 0; k < d; ++k) {
        const double s = spectrum(k);
        const double beta = theta_circ_coords(k);
        const double beta_sq = beta * beta;
        const double denom = s * s + 2.0 * lambda;
        const double b_k = lambda > 0.0 ? -2.0 * lambda * beta / denom : 0.0;
        sqrt_sigma_sq += s * b_k * b_k;
        sigma_cubed_sq += s * s * s * b_k * b_k;
        if (k < k_star) {
            head_inv += s > 0.0 ? beta_sq / s
                                : (beta_sq > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        } else {
            tail_fwd += s * beta_sq;
        }
        if (s + tau > 0.0) {
            envelope += s * beta_sq / ((s + tau) * (s + tau));
        }
    }

    BiasNormBounds out;
    out.sqrt_sigma_split.lhs = sqrt_sigma_sq;
    out.sqrt_sigma_split.rhs = 0.25 * sigma_ks * sigma_ks * head_inv + tail_fwd;
    out.sigma_cubed_split.lhs = lambda > 0.0 ? sigma_cubed_sq / (2.0 * lambda) : 0.0;
    out.sigma_cubed_split.rhs = sigma_ks * sigma_ks * head_inv + 0.25 * tail_fwd;
    out.ridge_envelope.lhs = std::max(out.sqrt_sigma_split.lhs, out.sigma_cubed_split.lhs);
    out.ridge_envelope.rhs = 2.0 * tau * tau * envelope;
    return out;
}

}  // namespace eio
