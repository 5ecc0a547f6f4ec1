#pragma once

#include "eio/estimators.hpp"
#include "eio/theory.hpp"
#include "eio/types.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace eio {

// Grids and Monte-Carlo controls for the experiment drivers.
struct SweepPlan {
    std::vector<Index> n_grid;
    std::vector<double> lambda_grid;
    std::vector<double> mu_grid;
    std::vector<double> tau_grid;
    std::vector<double> lambda_multipliers{1e-6, 1e-4, 1e-2, 1.0, 2.0};
    int replicates = 40;
    std::uint64_t base_seed = 0;
};

// lambda in {1.3^-40, ..., 1.3^39}.
std::vector<double> default_lambda_grid();
// mu in {2^0, ..., 2^29}.
std::vector<double> default_mu_grid();

struct ExperimentRecord {
    std::string experiment;
    std::map<std::string, double> parameters;  // n, d, lambda, mu, tau, ...
    std::string stat_label;                    // concentration rows only
    double statistic_mean = std::numeric_limits<double>::quiet_NaN();
    double statistic_sd = std::numeric_limits<double>::quiet_NaN();
    double statistic_q90 = std::numeric_limits<double>::quiet_NaN();
    double bound_value = std::numeric_limits<double>::quiet_NaN();
    long replicates = 1;
    bool skipped = false;

    double param(const std::string& key) const;  // NaN when absent
};

enum class EstimatorKind { Eio, PlugIn, Ridge };

std::string to_string(EstimatorKind kind);

// Deterministic stream id for replicate r of an experiment at sample size n;
// shared across estimators so comparisons are paired.
std::uint64_t dataset_stream_id(Index n, int replicate);

// Runs fn(0..count-1) on up to `workers` threads (0 = hardware concurrency).
// Results must be written into per-index slots; scheduling never affects them.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double p);

// Ratio ||Sigma^{1/2} b_lambda|| / ||Sigma^{1/2} (theta_star - theta_circ)||
// per (mu, lambda); deterministic (population level). mu may be the +inf
// sentinel, where the ratio is exactly 1 by the plug-in algebra.
std::vector<ExperimentRecord> ratio_bias_experiment(const ValidatedSpec& spec,
                                                    const Hyperparams& base,
                                                    const std::vector<double>& mu_grid,
                                                    const std::vector<double>& lambda_grid);

// Ratio ||Sigma^{1/2} zeta_tilde|| / ||Sigma^{1/2} (theta_hat - theta_star)||
// averaged over replicates, per (n, lambda). With use_lambda_opt the lambda
// grid is replaced by the per-n grid-search optimum at the given mu.
std::vector<ExperimentRecord> ratio_variance_experiment(
    const ValidatedSpec& spec, const Hyperparams& base, const std::vector<Index>& n_grid,
    const std::vector<double>& lambda_grid, double mu, int replicates,
    std::uint64_t base_seed, bool use_lambda_opt, int workers);

struct GridSearchResult {
    std::map<std::string, double> best;       // lambda / mu / tau as applicable
    double best_risk = 0.0;                   // mean excess risk at `best`
    std::vector<double> best_replicate_risks; // per-replicate risks at `best`
    std::vector<ExperimentRecord> table;      // one row per grid point
};

// Mean excess risk over common replicate datasets for every grid point;
// argmin with ties broken toward the smaller regularization value.
GridSearchResult grid_search(const ValidatedSpec& spec, const SweepPlan& plan,
                             EstimatorKind estimator, Index n, const Hyperparams& base,
                             int workers);

// Excess-risk curves over n for lambda = mult * lambda_opt(n) and
// mu in {mu_opt(lambda, n), +inf}; lambda_opt found at mu = +inf as in the
// source protocol.
std::vector<ExperimentRecord> double_descent_sweep(const ValidatedSpec& spec,
                                                   const SweepPlan& plan,
                                                   const Hyperparams& base, int workers);

// Paired comparison (common datasets) of the error-in-operator estimate at
// grid-optimal (mu, lambda) against ridge at grid-optimal tau, per n.
std::vector<ExperimentRecord> ridge_comparison(const ValidatedSpec& spec,
                                               const SweepPlan& plan,
                                               const Hyperparams& base, int workers);

struct ConcentrationReport {
    std::vector<ExperimentRecord> records;   // per (n, stat): median, q90, bound
    std::map<std::string, double> slopes;    // log-log slope of median vs n
    double min_c_x = 0.0;  // smallest c_x with q90(||Sigma_hat - Sigma||_F) <= bound for all n
};

// Empirical counterpart of the concentration bounds: medians and upper
// quantiles of ||Sigma_hat - Sigma||_op, ||Sigma_hat - Sigma||_F and ||u||.
ConcentrationReport concentration_montecarlo(const ValidatedSpec& spec,
                                             const std::vector<Index>& n_grid,
                                             int replicates, const BoundConfig& cfg,
                                             std::uint64_t base_seed, int workers);

}  // namespace eio
