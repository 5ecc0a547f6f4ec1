#pragma once

#include "eio/types.hpp"

namespace eio {

// Constants of the moment assumptions. They are not identifiable from data;
// the bound operations below are diagnostics evaluated at user-supplied
// values, never assertions.
struct BoundConfig {
    double c_x = 1.0;         // quadratic-form sub-Gaussian constant
    double sigma_psi1 = 0.09; // psi_1 norm proxy of Sigma^{-1/2} X eps
    double delta = 0.05;      // confidence parameter, in (0, 1)

    void validate() const;
};

struct SpectralSummary {
    double eff_rank = 0.0;  // Tr(Sigma) / ||Sigma||
    Index k_star = 0;       // max{k : sigma_k^2 >= 2 lambda}, 0 when none
    double r2 = 0.0;        // tail sum r_2(k_star)
    double r4 = 0.0;        // tail sum r_4(k_star)
};

struct BoundPair {
    double lhs = 0.0;
    double rhs = 0.0;
};

// Both sides of the bias-norm inequalities: the head/tail splits at k_star
// for ||Sigma^{1/2} b||^2 and ||Sigma^{3/2} b||^2 / (2 lambda), and the ridge
// envelope 2 tau^2 ||Sigma^{1/2} (Sigma + tau I)^{-1} theta||^2 valid when
// tau^2 = 2 lambda.
struct BiasNormBounds {
    BoundPair sqrt_sigma_split;
    BoundPair sigma_cubed_split;
    BoundPair ridge_envelope;
};

// b_lambda = -lambda (Sigma^2/2 + lambda I)^{-1} theta_circ, the leading term
// of theta_star - theta_circ.
Vector bias_leading_term(const Matrix& sigma, const Vector& theta_circ, double lambda);

struct VarianceLeadingTerm {
    Vector zeta;        // Sigma u - Sigma (Sigma_hat - Sigma) b - (Sigma_hat - Sigma) Sigma b
    Vector zeta_tilde;  // (Sigma^2 + 2 lambda I)^{-1} zeta
};

VarianceLeadingTerm variance_leading_term(const Matrix& sigma, const Matrix& sigma_hat,
                                          const Vector& u, const Vector& b_lambda,
                                          double lambda);

// ||Sigma^{1/2} (theta_hat - theta_circ)||^2, the excess prediction risk.
double excess_risk(const Matrix& sigma, const Vector& theta_hat, const Vector& theta_circ);

// r_q(k) = sum_{j > k} (sigma_j / sigma_{k+1})^q for a nonincreasing spectrum
// (1-based k; r_q(0) uses sigma_1 as the reference eigenvalue).
double tail_ratio_sum(const Vector& spectrum, Index k, double q);

SpectralSummary spectral_summary(const Vector& spectrum, double lambda);

// Psi(n, delta) = 196 (sigma ||Sigma||^{1/2}/||theta|| + 2 C_X ||Sigma||)^2
//                 (r(Sigma)^2 + log(4/delta)) / n.
double psi_bound(Index n, const BoundConfig& cfg, const Matrix& sigma,
                 const Vector& theta_circ);

// The remainder term of the risk expansion. Its mu-dependent part is
// O(1/mu); the Psi-driven part persists as mu grows.
double diamond_remainder(Index n, const BoundConfig& cfg, const Matrix& sigma,
                         const Vector& theta_circ, double mu, double lambda);

// Deterministic right-hand side of the excess-risk bound, including the
// remainder. Diagnostic only: valid as a bound only if cfg matches the design.
double risk_bound_rhs(Index n, const BoundConfig& cfg, const Matrix& sigma,
                      const Vector& theta_circ, double mu, double lambda);

struct ConcentrationBound {
    double value = 0.0;
    bool precondition_ok = true;  // sample-size requirement for validity
};

// Bound for ||B (Sigma_hat - Sigma) A^T||_F.
ConcentrationBound concentration_bound_cov(const Matrix& a, const Matrix& b,
                                           const Matrix& sigma, const BoundConfig& cfg,
                                           Index n);

// Bound for ||(1/n) sum_i B X_i eps_i||.
ConcentrationBound concentration_bound_noise(const Matrix& b, const Matrix& sigma,
                                             const BoundConfig& cfg, Index n);

// Works in the eigenbasis: `theta_circ_coords` are the coefficients of
// theta_circ on the eigenvectors matching `spectrum`. Requires tau^2 = 2 lambda.
BiasNormBounds bias_norm_bounds(const Vector& spectrum, const Vector& theta_circ_coords,
                                double lambda, double tau);

// Largest eigenvalue magnitude of a symmetric matrix.
double operator_norm_sym(const Matrix& m);

// ||Sigma^{1/2} v|| computed as sqrt(v^T Sigma v).
double sigma_half_norm(const Matrix& sigma, const Vector& v);

// Eigenvalues of a symmetric matrix in nonincreasing order.
Vector eigenvalues_desc(const Matrix& m);

}  // namespace eio
