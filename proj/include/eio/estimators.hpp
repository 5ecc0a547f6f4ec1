#pragma once

#include "eio/types.hpp"

namespace eio {

// Population counterpart of the sample moments: sigma = E X X^T and
// ez = E Z = sigma * theta_circ. Feeding these through the same fitting loop
// as the empirical moments yields the best parametric fit.
struct PopulationStats {
    Matrix sigma;
    Vector ez;

    static PopulationStats from_spec(const ValidatedSpec& spec);
};

// L(v) = 1/2 ||z - eta||^2 + 1/2 ||eta - A theta||^2
//        + mu^2/2 ||sigma_hat - A||_F^2 + lambda/2 ||theta||^2.
double objective_empirical(const SufficientStats& stats, const Hyperparams& hp,
                           const Triplet& v);

// Same functional with (z, sigma_hat) replaced by (sigma theta_circ, sigma).
double objective_population(const PopulationStats& pop, const Hyperparams& hp,
                            const Triplet& v);

// theta-block minimizer: (A^T A + 2 lambda I)^{-1} A^T z. With lambda = 0 the
// Gram matrix must be numerically nonsingular (condition < 1e12), else
// SingularSystem.
Vector theta_update(const Matrix& a, const Vector& z, double lambda);

// A-block minimizer. The stationarity system
//   A (2 mu^2 I + theta theta^T) = 2 mu^2 sigma_hat + z theta^T
// collapses through the rank-one (Sherman-Morrison) identity to
//   A = sigma_hat + (z - sigma_hat theta) theta^T / (2 mu^2 + ||theta||^2).
Matrix a_update(const Matrix& sigma_hat, const Vector& z, const Vector& theta, double mu);

// Alternating minimization from A_0 = sigma_hat; stops when
// ||theta_t - theta_{t-1}|| <= tol * max(1, ||theta_t||) or at max_iter.
// The mu = +inf sentinel delegates to the plug-in closed form.
FitReport eio_fit(const SufficientStats& stats, const Hyperparams& hp);

// The same loop run on population moments; computes the best parametric fit.
FitReport population_fit(const PopulationStats& pop, const Hyperparams& hp);

// (s^2 + 2 lambda I)^{-1} s z for a symmetric s.
Vector plugin_closed_form(const Matrix& s, const Vector& z, double lambda);

// Plug-in estimate (sigma_hat^2 + 2 lambda I)^{-1} sigma_hat z: the mu = +inf
// limit, i.e. ridge applied to the model z = sigma_hat theta + u.
Vector plugin_fit(const SufficientStats& stats, double lambda);

// Standard ridge estimate (X X^T + tau I)^{-1} X y.
Vector ridge_fit(const Dataset& data, double tau);

}  // namespace eio
