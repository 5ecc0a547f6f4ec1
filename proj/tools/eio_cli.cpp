#include "eio/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>

namespace {

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    std::string mu;
    std::string estimator;
    std::string dump_data;
    long long seed = 0;
    long long d = 0;
    long long n = 0;
    long long replicates = 0;
    int workers = 0;
    double lambda = 0.0;
    double tau = 0.0;
    double noise_std = 0.0;
};

void add_common_options(CLI::App* cmd, CliOverrides& ov) {
    cmd->add_option("--config", ov.config_path, "JSON config file (or a manifest to reproduce)");
    cmd->add_option("--seed", ov.seed, "master seed; every random draw derives from it");
    cmd->add_option("--out", ov.out_dir, "output directory (default: $EIO_OUT_DIR or .)");
    cmd->add_option("--workers", ov.workers, "worker threads (0 = hardware concurrency)");
    cmd->add_flag("--full-scale", "restore d = 200 and the full n grid");
    cmd->add_option("--d", ov.d, "ambient dimension");
    cmd->add_option("--n", ov.n, "sample size for single-dataset commands");
    cmd->add_option("--mu", ov.mu, "operator penalty weight (number or \"inf\")");
    cmd->add_option("--lambda", ov.lambda, "theta penalty weight");
    cmd->add_option("--tau", ov.tau, "ridge penalty");
    cmd->add_option("--noise-std", ov.noise_std, "noise standard deviation");
    cmd->add_option("--replicates", ov.replicates, "Monte-Carlo replicates");
}

int option_count(const CLI::App* app, const std::string& name) {
    const CLI::Option* opt = app->get_option_no_throw(name);
    return opt == nullptr ? 0 : static_cast<int>(opt->count());
}

double parse_mu(const std::string& text) {
    if (text == "inf" || text == "+inf" || text == "infinity") {
        return eio::kMuInfinity;
    }
    try {
        std::size_t pos = 0;
        const double value = std::stod(text, &pos);
        if (pos == text.size()) {
            return value;
        }
    } catch (const std::exception&) {
    }
    throw eio::ValidationError("--mu: expected a number or \"inf\"");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"error-in-operator regression: estimators, diagnostics and experiment drivers"};
    app.require_subcommand(1);

    CliOverrides ov;
    struct SubcommandSpec {
        const char* name;
        const char* help;
        eio::Command command;
    };
    const SubcommandSpec subs[] = {
        {"fit", "fit one synthetic dataset and report the excess risk", eio::Command::Fit},
        {"ratio-bias", "bias leading-term ratio over the (mu, lambda) grid",
         eio::Command::RatioBias},
        {"ratio-variance", "variance leading-term ratio over (n, lambda)",
         eio::Command::RatioVariance},
        {"grid-search", "hyperparameter search for one estimator at fixed n",
         eio::Command::GridSearch},
        {"double-descent", "risk vs n around the interpolation threshold",
         eio::Command::DoubleDescent},
        {"ridge-compare", "paired comparison against the ridge baseline",
         eio::Command::RidgeCompare},
        {"conc-check", "Monte-Carlo scaling of the concentration statistics",
         eio::Command::ConcCheck},
    };
    for (const auto& sub : subs) {
        CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
        add_common_options(cmd, ov);
        if (sub.command == eio::Command::GridSearch) {
            cmd->add_option("--estimator", ov.estimator, "eio | plugin | ridge");
        }
        if (sub.command == eio::Command::RatioVariance) {
            cmd->add_flag("--lambda-opt", "use the per-n grid-search optimal lambda");
        }
        if (sub.command == eio::Command::Fit) {
            cmd->add_option("--dump-data", ov.dump_data, "also write the dataset as CSV");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        std::fprintf(stderr, "%s\n", app.help().c_str());
        return 2;
    }

    CLI::App* active = app.get_subcommands().front();
    eio::Command command = eio::Command::Fit;
    for (const auto& sub : subs) {
        if (active->get_name() == sub.name) {
            command = sub.command;
        }
    }

    try {
        eio::RunConfig cfg = ov.config_path.empty()
                                 ? eio::default_config()
                                 : eio::parse_config_file(ov.config_path, /*finalize=*/false);

        if (option_count(active, "--full-scale") > 0) {
            eio::apply_full_scale(cfg);
        }
        const bool seed_given = option_count(active, "--seed") > 0;
        if (seed_given) {
            cfg.seed = static_cast<std::uint64_t>(ov.seed);
            cfg.plan.base_seed = cfg.seed;
        }
        if (option_count(active, "--out") > 0) cfg.output_dir = ov.out_dir;
        if (option_count(active, "--workers") > 0) cfg.workers = ov.workers;
        if (option_count(active, "--d") > 0) {
            cfg.d = static_cast<eio::Index>(ov.d);
            cfg.theta.clear();  // re-derive defaults at the new dimension
            cfg.spectrum.clear();
        }
        if (option_count(active, "--n") > 0) cfg.n = static_cast<eio::Index>(ov.n);
        if (option_count(active, "--mu") > 0) cfg.hyper.mu = parse_mu(ov.mu);
        if (option_count(active, "--lambda") > 0) cfg.hyper.lambda = ov.lambda;
        if (option_count(active, "--tau") > 0) cfg.hyper.tau = ov.tau;
        if (option_count(active, "--noise-std") > 0) cfg.noise_std = ov.noise_std;
        if (option_count(active, "--replicates") > 0) {
            cfg.plan.replicates = static_cast<int>(ov.replicates);
        }
        if (option_count(active, "--estimator") > 0) {
            if (ov.estimator == "eio") {
                cfg.estimator = eio::EstimatorKind::Eio;
            } else if (ov.estimator == "plugin") {
                cfg.estimator = eio::EstimatorKind::PlugIn;
            } else if (ov.estimator == "ridge") {
                cfg.estimator = eio::EstimatorKind::Ridge;
            } else {
                throw eio::ValidationError("--estimator: expected eio, plugin or ridge");
            }
        }
        if (option_count(active, "--lambda-opt") > 0) cfg.lambda_opt = true;
        if (option_count(active, "--dump-data") > 0) cfg.dump_data = ov.dump_data;

        return eio::run_command(command, cfg);
    } catch (const eio::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
