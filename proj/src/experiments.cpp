#include "eio/experiments.hpp"

#include "eio/datagen.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace eio {

namespace {

struct MeanSd {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double sd = std::numeric_limits<double>::quiet_NaN();
    long count = 0;
};

MeanSd mean_sd(const std::vector<double>& values) {
    MeanSd out;
    out.count = static_cast<long>(values.size());
    if (values.empty()) {
        return out;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() == 1) {
        out.sd = 0.0;
        return out;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return out;
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

// Per-replicate cache: sufficient statistics plus the eigendecomposition of
// sigma_hat, which turns every plug-in / ridge grid point into an O(d) eval.
struct ReplicateData {
    SufficientStats stats;
    Matrix evecs;
    Vector evals;
    Vector zw;  // evecs^T z
};

ReplicateData make_replicate(const ValidatedSpec& spec, Index n, std::uint64_t base_seed,
                             int replicate) {
    RngStream rng(base_seed, dataset_stream_id(n, replicate));
    const Dataset data = gen_design(spec, n, rng);
    ReplicateData rep;
    rep.stats = sufficient_stats(data, spec);
    Eigen::SelfAdjointEigenSolver<Matrix> es(rep.stats.sigma_hat);
    if (es.info() != Eigen::Success) {
        throw Error("eigendecomposition of sigma_hat failed");
    }
    rep.evecs = es.eigenvectors();
    rep.evals = es.eigenvalues();
    rep.zw = rep.evecs.transpose() * rep.stats.z;
    return rep;
}

Vector plugin_eigen_eval(const ReplicateData& rep, double lambda) {
    Vector coeff(rep.evals.size());
    for (Index k = 0; k < rep.evals.size(); ++k) {
        const double s = rep.evals(k);
        coeff(k) = s * rep.zw(k) / (s * s + 2.0 * lambda);
    }
    return rep.evecs * coeff;
}

Vector ridge_eigen_eval(const ReplicateData& rep, Index n, double tau) {
    const double nn = static_cast<double>(n);
    Vector coeff(rep.evals.size());
    for (Index k = 0; k < rep.evals.size(); ++k) {
        coeff(k) = nn * rep.zw(k) / (nn * rep.evals(k) + tau);
    }
    return rep.evecs * coeff;
}

std::vector<double> sorted_copy(std::vector<double> grid) {
    std::sort(grid.begin(), grid.end());
    return grid;
}

double lambda_opt_search(const ValidatedSpec& spec, const SweepPlan& plan,
                         EstimatorKind estimator, Index n, const Hyperparams& base,
                         int workers) {
    SweepPlan sub = plan;
    if (estimator == EstimatorKind::Eio) {
        sub.mu_grid = {base.mu};
    }
    GridSearchResult res = grid_search(spec, sub, estimator, n, base, workers);
    return res.best.at("lambda");
}

}  // namespace

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    grid.reserve(80);
    for (int k = -40; k <= 39; ++k) {
        grid.push_back(std::pow(1.3, k));
    }
    return grid;
}

std::vector<double> default_mu_grid() {
    std::vector<double> grid;
    grid.reserve(30);
    for (int k = 0; k <= 29; ++k) {
        grid.push_back(std::pow(2.0, k));
    }
    return grid;
}

double ExperimentRecord::param(const std::string& key) const {
    auto it = parameters.find(key);
    return it == parameters.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::Eio: return "eio";
        case EstimatorKind::PlugIn: return "plugin";
        case EstimatorKind::Ridge: return "ridge";
    }
    return "unknown";
}

std::uint64_t dataset_stream_id(Index n, int replicate) {
    if (replicate < 0 || replicate >= (1 << 20)) {
        throw ValidationError("replicate index out of range");
    }
    return (static_cast<std::uint64_t>(n) << 20) | static_cast<std::uint64_t>(replicate);
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
    if (count <= 0) {
        return;
    }
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) {
        throw ValidationError("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = h - std::floor(h);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<ExperimentRecord> ratio_bias_experiment(const ValidatedSpec& spec,
                                                    const Hyperparams& base,
                                                    const std::vector<double>& mu_grid,
                                                    const std::vector<double>& lambda_grid) {
    if (mu_grid.empty() || lambda_grid.empty()) {
        throw ValidationError("ratio_bias_experiment requires nonempty grids");
    }
    const PopulationStats pop = PopulationStats::from_spec(spec);
    const double d = static_cast<double>(spec.dim());

    std::vector<ExperimentRecord> records;
    records.reserve(mu_grid.size() * lambda_grid.size());
    for (double mu : mu_grid) {
        for (double lambda : lambda_grid) {
            const Vector b = bias_leading_term(pop.sigma, spec.theta_circ(), lambda);
            const double num = sigma_half_norm(pop.sigma, b);

            ExperimentRecord rec;
            rec.experiment = "ratio-bias";
            rec.parameters = {{"n", 0.0}, {"d", d}, {"lambda", lambda}, {"mu", mu}};
            rec.replicates = 1;

            Vector diff;
            if (std::isinf(mu)) {
                // theta_star - theta_circ = b_lambda exactly at the sentinel;
                // evaluating the difference through the closed form keeps the
                // recorded ratio exactly 1.
                diff = b;
            } else {
                const FitReport fit = population_fit(pop, base.with(mu, lambda));
                diff = fit.estimate.theta - spec.theta_circ();
            }
            const double den = sigma_half_norm(pop.sigma, diff);
            if (den == 0.0) {
                rec.skipped = true;
            } else {
                rec.statistic_mean = num / den;
                rec.statistic_sd = 0.0;
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::vector<ExperimentRecord> ratio_variance_experiment(
    const ValidatedSpec& spec, const Hyperparams& base, const std::vector<Index>& n_grid,
    const std::vector<double>& lambda_grid, double mu, int replicates,
    std::uint64_t base_seed, bool use_lambda_opt, int workers) {
    if (n_grid.empty() || replicates < 1) {
        throw ValidationError("ratio_variance_experiment requires n_grid and replicates >= 1");
    }
    if (!use_lambda_opt && lambda_grid.empty()) {
        throw ValidationError("ratio_variance_experiment requires a lambda grid");
    }
    const PopulationStats pop = PopulationStats::from_spec(spec);
    const double d = static_cast<double>(spec.dim());

    std::vector<ExperimentRecord> records;
    for (Index n : n_grid) {
        std::vector<double> lambdas = lambda_grid;
        if (use_lambda_opt) {
            SweepPlan plan;
            plan.lambda_grid = lambda_grid.empty() ? default_lambda_grid() : lambda_grid;
            plan.replicates = replicates;
            plan.base_seed = base_seed;
            lambdas = {lambda_opt_search(spec, plan, EstimatorKind::Eio, n,
                                         base.with(mu, base.lambda), workers)};
        }

        // Population fits and bias terms are deterministic per lambda.
        std::vector<Vector> theta_star(lambdas.size());
        std::vector<Vector> bias(lambdas.size());
        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            theta_star[li] = population_fit(pop, base.with(mu, lambdas[li])).estimate.theta;
            bias[li] = bias_leading_term(pop.sigma, spec.theta_circ(), lambdas[li]);
        }

        std::vector<std::vector<double>> ratios(lambdas.size(),
                                                std::vector<double>(replicates, 0.0));
        std::vector<std::vector<bool>> valid(lambdas.size(),
                                             std::vector<bool>(replicates, false));
        parallel_for(replicates, workers, [&](int r) {
            RngStream rng(base_seed, dataset_stream_id(n, r));
            const Dataset data = gen_design(spec, n, rng);
            const SufficientStats stats = sufficient_stats(data, spec);
            for (std::size_t li = 0; li < lambdas.size(); ++li) {
                const FitReport fit = eio_fit(stats, base.with(mu, lambdas[li]));
                const VarianceLeadingTerm vlt = variance_leading_term(
                    pop.sigma, stats.sigma_hat, *stats.u, bias[li], lambdas[li]);
                const double num = sigma_half_norm(pop.sigma, vlt.zeta_tilde);
                const double den =
                    sigma_half_norm(pop.sigma, fit.estimate.theta - theta_star[li]);
                if (den > 0.0) {
                    ratios[li][static_cast<std::size_t>(r)] = num / den;
                    valid[li][static_cast<std::size_t>(r)] = true;
                }
            }
        });

        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            std::vector<double> kept;
            kept.reserve(static_cast<std::size_t>(replicates));
            for (int r = 0; r < replicates; ++r) {
                if (valid[li][static_cast<std::size_t>(r)]) {
                    kept.push_back(ratios[li][static_cast<std::size_t>(r)]);
                }
            }
            ExperimentRecord rec;
            rec.experiment = "ratio-variance";
            rec.parameters = {{"n", static_cast<double>(n)},
                              {"d", d},
                              {"lambda", lambdas[li]},
                              {"mu", mu}};
            const MeanSd ms = mean_sd(kept);
            rec.statistic_mean = ms.mean;
            rec.statistic_sd = ms.sd;
            rec.replicates = ms.count;
            rec.skipped = kept.empty();
            records.push_back(std::move(rec));
        }
    }
    return records;
}

GridSearchResult grid_search(const ValidatedSpec& spec, const SweepPlan& plan,
                             EstimatorKind estimator, Index n, const Hyperparams& base,
                             int workers) {
    if (plan.replicates < 1) {
        throw ValidationError("grid_search requires replicates >= 1");
    }
    const PopulationStats pop = PopulationStats::from_spec(spec);
    const double d = static_cast<double>(spec.dim());

    // Canonical ascending order makes "ties toward smaller regularization"
    // a plain strict-improvement scan.
    std::vector<std::pair<double, double>> points;  // (lambda, mu) / (lambda,-) / (tau,-)
    switch (estimator) {
        case EstimatorKind::Eio: {
            if (plan.lambda_grid.empty() || plan.mu_grid.empty()) {
                throw ValidationError("grid_search(eio) requires lambda and mu grids");
            }
            for (double lambda : sorted_copy(plan.lambda_grid)) {
                for (double mu : sorted_copy(plan.mu_grid)) {
                    points.emplace_back(lambda, mu);
                }
            }
            break;
        }
        case EstimatorKind::PlugIn: {
            if (plan.lambda_grid.empty()) {
                throw ValidationError("grid_search(plugin) requires a lambda grid");
            }
            for (double lambda : sorted_copy(plan.lambda_grid)) {
                points.emplace_back(lambda, 0.0);
            }
            break;
        }
        case EstimatorKind::Ridge: {
            if (plan.tau_grid.empty()) {
                throw ValidationError("grid_search(ridge) requires a tau grid");
            }
            for (double tau : sorted_copy(plan.tau_grid)) {
                points.emplace_back(tau, 0.0);
            }
            break;
        }
    }

    const int R = plan.replicates;
    const std::size_t G = points.size();
    std::vector<std::vector<double>> risks(G, std::vector<double>(static_cast<std::size_t>(R)));
    parallel_for(R, workers, [&](int r) {
        const ReplicateData rep = make_replicate(spec, n, plan.base_seed, r);
        for (std::size_t g = 0; g < G; ++g) {
            Vector theta_hat;
            switch (estimator) {
                case EstimatorKind::Eio:
                    theta_hat =
                        eio_fit(rep.stats, base.with(points[g].second, points[g].first))
                            .estimate.theta;
                    break;
                case EstimatorKind::PlugIn:
                    theta_hat = plugin_eigen_eval(rep, points[g].first);
                    break;
                case EstimatorKind::Ridge:
                    theta_hat = ridge_eigen_eval(rep, n, points[g].first);
                    break;
            }
            risks[g][static_cast<std::size_t>(r)] =
                excess_risk(pop.sigma, theta_hat, spec.theta_circ());
        }
    });

    GridSearchResult result;
    result.table.reserve(G);
    std::size_t best_g = 0;
    double best_risk = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < G; ++g) {
        const MeanSd ms = mean_sd(risks[g]);
        ExperimentRecord rec;
        rec.experiment = "grid-search/" + to_string(estimator);
        rec.parameters = {{"n", static_cast<double>(n)}, {"d", d}};
        switch (estimator) {
            case EstimatorKind::Eio:
                rec.parameters["lambda"] = points[g].first;
                rec.parameters["mu"] = points[g].second;
                break;
            case EstimatorKind::PlugIn:
                rec.parameters["lambda"] = points[g].first;
                rec.parameters["mu"] = kMuInfinity;
                break;
            case EstimatorKind::Ridge:
                rec.parameters["tau"] = points[g].first;
                break;
        }
        rec.statistic_mean = ms.mean;
        rec.statistic_sd = ms.sd;
        rec.replicates = ms.count;
        result.table.push_back(std::move(rec));
        if (ms.mean < best_risk) {
            best_risk = ms.mean;
            best_g = g;
        }
    }

    result.best_risk = best_risk;
    result.best_replicate_risks = risks[best_g];
    switch (estimator) {
        case EstimatorKind::Eio:
            result.best = {{"lambda", points[best_g].first}, {"mu", points[best_g].second}};
            break;
        case EstimatorKind::PlugIn:
            result.best = {{"lambda", points[best_g].first}};
            break;
        case EstimatorKind::Ridge:
            result.best = {{"tau", points[best_g].first}};
            break;
    }
    return result;
}

std::vector<ExperimentRecord> double_descent_sweep(const ValidatedSpec& spec,
                                                   const SweepPlan& plan,
                                                   const Hyperparams& base, int workers) {
    if (plan.n_grid.empty() || plan.lambda_grid.empty() || plan.mu_grid.empty() ||
        plan.lambda_multipliers.empty()) {
        throw ValidationError("double_descent_sweep requires n, lambda, mu and multiplier grids");
    }
    const double d = static_cast<double>(spec.dim());
    std::vector<ExperimentRecord> records;

    for (Index n : plan.n_grid) {
        const double lambda_opt =
            lambda_opt_search(spec, plan, EstimatorKind::PlugIn, n, base, workers);
        for (double mult : plan.lambda_multipliers) {
            const double lambda = mult * lambda_opt;

            SweepPlan finite = plan;
            finite.lambda_grid = {lambda};
            const GridSearchResult eio_res =
                grid_search(spec, finite, EstimatorKind::Eio, n, base, workers);
            const GridSearchResult plug_res =
                grid_search(spec, finite, EstimatorKind::PlugIn, n, base, workers);

            const MeanSd eio_ms = mean_sd(eio_res.best_replicate_risks);
            ExperimentRecord finite_rec;
            finite_rec.experiment = "double-descent";
            finite_rec.parameters = {{"n", static_cast<double>(n)},
                                     {"d", d},
                                     {"lambda", lambda},
                                     {"lambda_mult", mult},
                                     {"mu", eio_res.best.at("mu")}};
            finite_rec.statistic_mean = eio_ms.mean;
            finite_rec.statistic_sd = eio_ms.sd;
            finite_rec.replicates = eio_ms.count;
            records.push_back(std::move(finite_rec));

            const MeanSd plug_ms = mean_sd(plug_res.best_replicate_risks);
            ExperimentRecord inf_rec;
            inf_rec.experiment = "double-descent";
            inf_rec.parameters = {{"n", static_cast<double>(n)},
                                  {"d", d},
                                  {"lambda", lambda},
                                  {"lambda_mult", mult},
                                  {"mu", kMuInfinity}};
            inf_rec.statistic_mean = plug_ms.mean;
            inf_rec.statistic_sd = plug_ms.sd;
            inf_rec.replicates = plug_ms.count;
            records.push_back(std::move(inf_rec));
        }
    }
    return records;
}

std::vector<ExperimentRecord> ridge_comparison(const ValidatedSpec& spec,
                                               const SweepPlan& plan,
                                               const Hyperparams& base, int workers) {
    if (plan.n_grid.empty() || plan.lambda_grid.empty() || plan.mu_grid.empty() ||
        plan.tau_grid.empty()) {
        throw ValidationError("ridge_comparison requires n, lambda, mu and tau grids");
    }
    const double d = static_cast<double>(spec.dim());
    std::vector<ExperimentRecord> records;

    for (Index n : plan.n_grid) {
        const double lambda_opt =
            lambda_opt_search(spec, plan, EstimatorKind::PlugIn, n, base, workers);

        SweepPlan eio_plan = plan;
        eio_plan.lambda_grid = {lambda_opt};
        const GridSearchResult eio_res =
            grid_search(spec, eio_plan, EstimatorKind::Eio, n, base, workers);
        const GridSearchResult ridge_res =
            grid_search(spec, plan, EstimatorKind::Ridge, n, base, workers);

        const MeanSd eio_ms = mean_sd(eio_res.best_replicate_risks);
        ExperimentRecord eio_rec;
        eio_rec.experiment = "ridge-compare/eio";
        eio_rec.parameters = {{"n", static_cast<double>(n)},
                              {"d", d},
                              {"lambda", lambda_opt},
                              {"mu", eio_res.best.at("mu")}};
        eio_rec.statistic_mean = eio_ms.mean;
        eio_rec.statistic_sd = eio_ms.sd;
        eio_rec.replicates = eio_ms.count;
        records.push_back(std::move(eio_rec));

        const MeanSd ridge_ms = mean_sd(ridge_res.best_replicate_risks);
        ExperimentRecord ridge_rec;
        ridge_rec.experiment = "ridge-compare/ridge";
        ridge_rec.parameters = {{"n", static_cast<double>(n)},
                                {"d", d},
                                {"tau", ridge_res.best.at("tau")}};
        ridge_rec.statistic_mean = ridge_ms.mean;
        ridge_rec.statistic_sd = ridge_ms.sd;
        ridge_rec.replicates = ridge_ms.count;
        records.push_back(std::move(ridge_rec));

        // Paired differences on common datasets.
        std::vector<double> diffs(eio_res.best_replicate_risks.size());
        for (std::size_t r = 0; r < diffs.size(); ++r) {
            diffs[r] = eio_res.best_replicate_risks[r] - ridge_res.best_replicate_risks[r];
        }
        const MeanSd diff_ms = mean_sd(diffs);
        ExperimentRecord diff_rec;
        diff_rec.experiment = "ridge-compare/diff";
        diff_rec.parameters = {{"n", static_cast<double>(n)}, {"d", d}};
        diff_rec.statistic_mean = diff_ms.mean;
        diff_rec.statistic_sd = diff_ms.sd;
        diff_rec.replicates = diff_ms.count;
        records.push_back(std::move(diff_rec));
    }
    return records;
}

ConcentrationReport concentration_montecarlo(const ValidatedSpec& spec,
                                             const std::vector<Index>& n_grid,
                                             int replicates, const BoundConfig& cfg,
                                             std::uint64_t base_seed, int workers) {
    if (n_grid.empty() || replicates < 1) {
        throw ValidationError("concentration_montecarlo requires n_grid and replicates >= 1");
    }
    const Matrix sigma = true_covariance(spec);
    const Matrix identity = Matrix::Identity(spec.dim(), spec.dim());
    const double d = static_cast<double>(spec.dim());
    const std::vector<std::string> stats = {"cov_op", "cov_fro", "u_norm"};

    ConcentrationReport report;
    std::vector<double> log_n;
    std::map<std::string, std::vector<double>> log_median;
    double min_c_x = 0.0;

    for (Index n : n_grid) {
        std::vector<double> op_norms(static_cast<std::size_t>(replicates));
        std::vector<double> fro_norms(static_cast<std::size_t>(replicates));
        std::vector<double> u_norms(static_cast<std::size_t>(replicates));
        parallel_for(replicates, workers, [&](int r) {
            RngStream rng(base_seed, dataset_stream_id(n, r));
            const Dataset data = gen_design(spec, n, rng);
            const SufficientStats s = sufficient_stats(data, spec);
            const Matrix delta = s.sigma_hat - sigma;
            op_norms[static_cast<std::size_t>(r)] = operator_norm_sym(delta);
            fro_norms[static_cast<std::size_t>(r)] = delta.norm();
            u_norms[static_cast<std::size_t>(r)] = s.u->norm();
        });

        const ConcentrationBound cov_bound =
            concentration_bound_cov(identity, identity, sigma, cfg, n);
        const ConcentrationBound noise_bound =
            concentration_bound_noise(identity, sigma, cfg, n);

        const std::vector<double>* samples[3] = {&op_norms, &fro_norms, &u_norms};
        const double bounds[3] = {cov_bound.value, cov_bound.value, noise_bound.value};
        for (int s_i = 0; s_i < 3; ++s_i) {
            ExperimentRecord rec;
            rec.experiment = "conc-check";
            rec.stat_label = stats[static_cast<std::size_t>(s_i)];
            rec.parameters = {{"n", static_cast<double>(n)}, {"d", d}};
            rec.statistic_mean = quantile(*samples[s_i], 0.5);
            rec.statistic_q90 = quantile(*samples[s_i], 0.9);
            rec.bound_value = bounds[s_i];
            rec.replicates = replicates;
            report.records.push_back(std::move(rec));
        }

        log_n.push_back(std::log(static_cast<double>(n)));
        log_median["cov_op"].push_back(std::log(quantile(op_norms, 0.5)));
        log_median["cov_fro"].push_back(std::log(quantile(fro_norms, 0.5)));
        log_median["u_norm"].push_back(std::log(quantile(u_norms, 0.5)));

        // The bound is linear in c_x; q90 <= bound pins the minimal constant.
        const double unit_bound = cov_bound.value / cfg.c_x;
        if (unit_bound > 0.0) {
            min_c_x = std::max(min_c_x, quantile(fro_norms, 0.9) / unit_bound);
        }
    }

    if (n_grid.size() >= 2) {
        for (const auto& [label, values] : log_median) {
            report.slopes[label] = slope_fit(log_n, values);
        }
    }
    report.min_c_x = min_c_x;
    return report;
}

}  // namespace eio
