#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace eio {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error taxonomy. Every contract violation throws a distinct type so callers
// (and tests) can react to the specific condition.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : Error { using Error::Error; };
struct NonmonotoneSpectrum : Error { using Error::Error; };
struct NonorthogonalEigvecs : Error { using Error::Error; };
struct KindMismatch : Error { using Error::Error; };
struct InfiniteMu : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };
struct ZeroTheta : Error { using Error::Error; };
struct TauLambdaMismatch : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Sentinel for the mu = +infinity regime; estimator code branches to the
// plug-in closed form instead of feeding an overflow-prone value into the
// operator update.
inline constexpr double kMuInfinity = std::numeric_limits<double>::infinity();

enum class DesignKind { SineFeature, GaussianSpectrum, ExplicitCovariance };

std::string to_string(DesignKind kind);

// Eigenvalue of the sine-feature covariance in coordinate k (1-based):
// Var(k^{-1/8} sin(pi k xi)) = k^{-1/4} / 2 for xi ~ Uniform[-1,1].
double sine_eigenvalue(Index k);

// Covariate family plus ground truth: the full description of a synthetic
// regression problem. `spectrum` holds the eigenvalues of the population
// covariance in nonincreasing order; `eigvecs`, when present, holds the
// corresponding orthonormal eigenvectors (identity when absent).
struct DesignSpec {
    DesignKind kind = DesignKind::SineFeature;
    Index dim = 0;
    Vector spectrum;
    std::optional<Matrix> eigvecs;
    Vector theta_circ;
    double noise_std = 0.0;

    static DesignSpec sine(Index dim, Vector theta_circ, double noise_std);
    static DesignSpec gaussian(Vector spectrum, Vector theta_circ, double noise_std,
                               std::optional<Matrix> eigvecs = std::nullopt);
    // Eigendecomposes `sigma` (symmetrized) into (spectrum, eigvecs).
    static DesignSpec explicit_covariance(const Matrix& sigma, Vector theta_circ,
                                          double noise_std);
};

class ValidatedSpec;

// Checks invariants and fills derived fields (e.g. the sine spectrum).
// Throws NonmonotoneSpectrum, DimensionMismatch, NonorthogonalEigvecs,
// KindMismatch or ValidationError.
ValidatedSpec validate_spec(const DesignSpec& spec);

class ValidatedSpec {
public:
    const DesignSpec& spec() const { return spec_; }
    DesignKind kind() const { return spec_.kind; }
    Index dim() const { return spec_.dim; }
    const Vector& spectrum() const { return spec_.spectrum; }
    const std::optional<Matrix>& eigvecs() const { return spec_.eigvecs; }
    const Vector& theta_circ() const { return spec_.theta_circ; }
    double noise_std() const { return spec_.noise_std; }

private:
    friend ValidatedSpec validate_spec(const DesignSpec& spec);
    explicit ValidatedSpec(DesignSpec spec) : spec_(std::move(spec)) {}
    DesignSpec spec_;
};

// An n-sample: columns of `x` are the covariate vectors X_1..X_n.
struct Dataset {
    Matrix x;  // d x n
    Vector y;  // n

    Index dim() const { return x.rows(); }
    Index n() const { return y.size(); }
    void validate() const;  // column count == y size, all entries finite
};

// Sample moments through which every estimator is computed:
//   z = (1/n) X y,  sigma_hat = (1/n) X X^T (symmetrized),
//   u = z - sigma_hat theta_circ (populated only for synthetic data).
struct SufficientStats {
    Vector z;
    Matrix sigma_hat;
    std::optional<Vector> u;

    Index dim() const { return z.size(); }
};

struct Hyperparams {
    double mu = 1e8;
    double lambda = 1.0;
    double tau = 1.0;
    int max_iter = 200;
    double tol = 1e-10;

    bool mu_infinite() const { return std::isinf(mu) && mu > 0; }
    void validate() const;  // mu > 0, lambda >= 0, tau >= 0, tol > 0, max_iter >= 1

    Hyperparams with(double new_mu, double new_lambda) const {
        Hyperparams hp = *this;
        hp.mu = new_mu;
        hp.lambda = new_lambda;
        return hp;
    }
};

// A point v = (theta, eta, a) in the joint parameter space of the objective.
struct Triplet {
    Vector theta;
    Vector eta;
    Matrix a;

    Index dim() const { return theta.size(); }
    void validate() const;  // equal dimensions, finite entries
};

struct FitReport {
    Triplet estimate;
    std::vector<double> objective_trace;   // L(v_t) per iteration
    std::vector<double> theta_residuals;   // ||theta_t - theta_{t-1}|| per iteration
    int iterations = 0;
    bool converged = false;
};

// (M + M^T) / 2: suppresses floating-point asymmetry after Gram products.
Matrix symmetrize(const Matrix& m);

void require_finite(const Matrix& m, const char* what);
void require_finite(const Vector& v, const char* what);

}  // namespace eio
