#include "eio/io.hpp"

#include "eio/datagen.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace eio {

namespace {

using nlohmann::json;

constexpr const char* kArtifactVersion = "0.1.0";

std::string location_of(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

void reject_unknown_keys(const json& obj, const std::string& section,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ValidationError("unknown key \"" + item.key() + "\" in " + section);
        }
    }
}

double number_from(const json& v, const std::string& field) {
    if (v.is_number()) {
        return v.get<double>();
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf" || s == "+inf" || s == "infinity") {
            return kMuInfinity;
        }
    }
    throw ValidationError(field + ": expected a number (or \"inf\")");
}

std::vector<double> numbers_from(const json& v, const std::string& field) {
    if (!v.is_array()) {
        throw ValidationError(field + ": expected an array of numbers");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        out.push_back(number_from(e, field));
    }
    return out;
}

long long integer_from(const json& v, const std::string& field) {
    if (!v.is_number_integer()) {
        throw ValidationError(field + ": expected an integer");
    }
    return v.get<long long>();
}

json number_to_json(double v) {
    if (std::isinf(v)) {
        return v > 0 ? json("inf") : json("-inf");
    }
    return json(v);
}

json numbers_to_json(const std::vector<double>& values) {
    json arr = json::array();
    for (double v : values) arr.push_back(number_to_json(v));
    return arr;
}

DesignKind kind_from_name(const std::string& name) {
    if (name == "sine") return DesignKind::SineFeature;
    if (name == "gaussian") return DesignKind::GaussianSpectrum;
    if (name == "explicit") return DesignKind::ExplicitCovariance;
    throw ValidationError("design.kind: unknown kind \"" + name + "\"");
}

EstimatorKind estimator_from_name(const std::string& name) {
    if (name == "eio") return EstimatorKind::Eio;
    if (name == "plugin") return EstimatorKind::PlugIn;
    if (name == "ridge") return EstimatorKind::Ridge;
    throw ValidationError("estimator: unknown estimator \"" + name + "\"");
}

std::string fmt_float(double v) {
    if (std::isnan(v)) {
        return "";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_int(double v) {
    if (std::isnan(v)) {
        return "";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(std::llround(v)));
    return buf;
}

std::vector<Index> default_n_grid(Command cmd) {
    switch (cmd) {
        case Command::RatioVariance: return {500, 1000, 2000};
        case Command::DoubleDescent: {
            std::vector<Index> grid;
            for (Index n = 20; n <= 120; n += 10) grid.push_back(n);
            return grid;
        }
        case Command::RidgeCompare: return {40, 60, 80, 100, 120};
        case Command::ConcCheck: return {250, 500, 1000, 2000, 4000};
        default: return {};
    }
}

}  // namespace

std::optional<Command> command_from_name(std::string_view name) {
    if (name == "fit") return Command::Fit;
    if (name == "ratio-bias") return Command::RatioBias;
    if (name == "ratio-variance") return Command::RatioVariance;
    if (name == "grid-search") return Command::GridSearch;
    if (name == "double-descent") return Command::DoubleDescent;
    if (name == "ridge-compare") return Command::RidgeCompare;
    if (name == "conc-check") return Command::ConcCheck;
    return std::nullopt;
}

std::string to_string(Command cmd) {
    switch (cmd) {
        case Command::Fit: return "fit";
        case Command::RatioBias: return "ratio-bias";
        case Command::RatioVariance: return "ratio-variance";
        case Command::GridSearch: return "grid-search";
        case Command::DoubleDescent: return "double-descent";
        case Command::RidgeCompare: return "ridge-compare";
        case Command::ConcCheck: return "conc-check";
    }
    return "unknown";
}

RunConfig default_config() {
    RunConfig cfg;
    cfg.bounds.sigma_psi1 = std::numeric_limits<double>::quiet_NaN();  // -> noise_std
    cfg.plan.base_seed = 0;
    return cfg;
}

void apply_full_scale(RunConfig& cfg) {
    cfg.full_scale = true;
    cfg.d = 200;
    if (cfg.theta.size() != 200) cfg.theta.clear();
    if (cfg.spectrum.size() != 200) cfg.spectrum.clear();
    cfg.plan.n_grid.clear();
    for (Index n = 50; n <= 500; n += 50) {
        cfg.plan.n_grid.push_back(n);
    }
}

void finalize_config(RunConfig& cfg) {
    if (cfg.d < 1) {
        throw ValidationError("dim must be >= 1");
    }
    if (cfg.n < 1) {
        throw ValidationError("n must be >= 1");
    }
    if (cfg.theta.empty()) {
        cfg.theta.resize(static_cast<std::size_t>(cfg.d));
        for (Index k = 1; k <= cfg.d; ++k) {
            cfg.theta[static_cast<std::size_t>(k - 1)] =
                std::pow(static_cast<double>(k), -3.0);
        }
    }
    if (cfg.theta.size() != static_cast<std::size_t>(cfg.d)) {
        throw ValidationError("design.theta: length does not match d");
    }
    if (cfg.kind != DesignKind::SineFeature && cfg.spectrum.empty()) {
        cfg.spectrum.assign(static_cast<std::size_t>(cfg.d), 1.0);
    }
    if (cfg.kind == DesignKind::SineFeature && !cfg.spectrum.empty()) {
        throw ValidationError("design.spectrum: not accepted for the sine design");
    }
    if (cfg.plan.lambda_grid.empty()) cfg.plan.lambda_grid = default_lambda_grid();
    if (cfg.plan.mu_grid.empty()) cfg.plan.mu_grid = default_mu_grid();
    if (cfg.plan.tau_grid.empty()) cfg.plan.tau_grid = default_lambda_grid();
    if (cfg.plan.replicates < 1) {
        throw ValidationError("plan.replicates must be >= 1");
    }
    if (cfg.workers < 0) {
        throw ValidationError("workers must be >= 0");
    }
    if (std::isnan(cfg.bounds.sigma_psi1)) {
        cfg.bounds.sigma_psi1 = cfg.noise_std;
    }
    cfg.bounds.validate();
    cfg.hyper.validate();
}

RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            bool finalize) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + location_of(text, e.byte > 0 ? e.byte - 1 : 0) +
                         ": " + e.what());
    }
    if (!root.is_object()) {
        throw ParseError(origin + ": top-level value must be an object");
    }
    // A manifest embeds the config it ran with; unwrap it.
    if (root.contains("config") && root.contains("command")) {
        root = root["config"];
        if (!root.is_object()) {
            throw ParseError(origin + ": manifest \"config\" must be an object");
        }
    }

    reject_unknown_keys(root, "config",
                        {"design", "hyper", "plan", "bounds", "n", "estimator", "lambda_opt",
                         "output_dir", "seed", "workers", "full_scale", "dump_data"});

    RunConfig cfg = default_config();
    if (root.contains("design")) {
        const json& d = root["design"];
        reject_unknown_keys(d, "design", {"kind", "d", "noise_std", "theta", "spectrum", "eigvecs"});
        if (d.contains("kind")) cfg.kind = kind_from_name(d["kind"].get<std::string>());
        if (d.contains("d")) cfg.d = static_cast<Index>(integer_from(d["d"], "design.d"));
        if (d.contains("noise_std")) cfg.noise_std = number_from(d["noise_std"], "design.noise_std");
        if (d.contains("theta")) cfg.theta = numbers_from(d["theta"], "design.theta");
        if (d.contains("spectrum")) cfg.spectrum = numbers_from(d["spectrum"], "design.spectrum");
        if (d.contains("eigvecs")) {
            if (!d["eigvecs"].is_array()) {
                throw ValidationError("design.eigvecs: expected an array of rows");
            }
            cfg.eigvecs.clear();
            for (const auto& row : d["eigvecs"]) {
                cfg.eigvecs.push_back(numbers_from(row, "design.eigvecs"));
            }
        }
    }
    if (root.contains("hyper")) {
        const json& h = root["hyper"];
        reject_unknown_keys(h, "hyper", {"mu", "lambda", "tau", "max_iter", "tol"});
        if (h.contains("mu")) cfg.hyper.mu = number_from(h["mu"], "hyper.mu");
        if (h.contains("lambda")) cfg.hyper.lambda = number_from(h["lambda"], "hyper.lambda");
        if (h.contains("tau")) cfg.hyper.tau = number_from(h["tau"], "hyper.tau");
        if (h.contains("max_iter")) {
            cfg.hyper.max_iter = static_cast<int>(integer_from(h["max_iter"], "hyper.max_iter"));
        }
        if (h.contains("tol")) cfg.hyper.tol = number_from(h["tol"], "hyper.tol");
    }
    if (root.contains("plan")) {
        const json& p = root["plan"];
        reject_unknown_keys(p, "plan",
                            {"n_grid", "lambda_grid", "mu_grid", "tau_grid",
                             "lambda_multipliers", "replicates", "base_seed"});
        if (p.contains("n_grid")) {
            cfg.plan.n_grid.clear();
            for (const auto& e : p["n_grid"]) {
                cfg.plan.n_grid.push_back(static_cast<Index>(integer_from(e, "plan.n_grid")));
            }
        }
        if (p.contains("lambda_grid")) {
            cfg.plan.lambda_grid = numbers_from(p["lambda_grid"], "plan.lambda_grid");
        }
        if (p.contains("mu_grid")) cfg.plan.mu_grid = numbers_from(p["mu_grid"], "plan.mu_grid");
        if (p.contains("tau_grid")) cfg.plan.tau_grid = numbers_from(p["tau_grid"], "plan.tau_grid");
        if (p.contains("lambda_multipliers")) {
            cfg.plan.lambda_multipliers =
                numbers_from(p["lambda_multipliers"], "plan.lambda_multipliers");
        }
        if (p.contains("replicates")) {
            cfg.plan.replicates = static_cast<int>(integer_from(p["replicates"], "plan.replicates"));
        }
        if (p.contains("base_seed")) {
            cfg.plan.base_seed =
                static_cast<std::uint64_t>(integer_from(p["base_seed"], "plan.base_seed"));
        } else {
            cfg.plan.base_seed = cfg.seed;  // may be overridden by "seed" below
        }
    }
    if (root.contains("bounds")) {
        const json& b = root["bounds"];
        reject_unknown_keys(b, "bounds", {"c_x", "sigma_psi1", "delta"});
        if (b.contains("c_x")) cfg.bounds.c_x = number_from(b["c_x"], "bounds.c_x");
        if (b.contains("sigma_psi1")) {
            cfg.bounds.sigma_psi1 = number_from(b["sigma_psi1"], "bounds.sigma_psi1");
        }
        if (b.contains("delta")) cfg.bounds.delta = number_from(b["delta"], "bounds.delta");
    }
    if (root.contains("n")) cfg.n = static_cast<Index>(integer_from(root["n"], "n"));
    if (root.contains("estimator")) {
        cfg.estimator = estimator_from_name(root["estimator"].get<std::string>());
    }
    if (root.contains("lambda_opt")) {
        if (!root["lambda_opt"].is_boolean()) throw ValidationError("lambda_opt: expected a boolean");
        cfg.lambda_opt = root["lambda_opt"].get<bool>();
    }
    if (root.contains("output_dir")) cfg.output_dir = root["output_dir"].get<std::string>();
    if (root.contains("seed")) {
        cfg.seed = static_cast<std::uint64_t>(integer_from(root["seed"], "seed"));
        if (!root.contains("plan") || !root["plan"].contains("base_seed")) {
            cfg.plan.base_seed = cfg.seed;
        }
    }
    if (root.contains("workers")) {
        cfg.workers = static_cast<int>(integer_from(root["workers"], "workers"));
    }
    if (root.contains("full_scale")) {
        if (!root["full_scale"].is_boolean()) throw ValidationError("full_scale: expected a boolean");
        if (root["full_scale"].get<bool>()) apply_full_scale(cfg);
    }
    if (root.contains("dump_data")) cfg.dump_data = root["dump_data"].get<std::string>();

    if (finalize) {
        finalize_config(cfg);
    }
    return cfg;
}

RunConfig parse_config_file(const std::filesystem::path& path, bool finalize) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot read config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path.string(), finalize);
}

std::string config_to_text(const RunConfig& cfg) {
    json design;
    design["kind"] = to_string(cfg.kind);
    design["d"] = static_cast<long long>(cfg.d);
    design["noise_std"] = cfg.noise_std;
    design["theta"] = numbers_to_json(cfg.theta);
    if (!cfg.spectrum.empty()) design["spectrum"] = numbers_to_json(cfg.spectrum);
    if (!cfg.eigvecs.empty()) {
        json rows = json::array();
        for (const auto& row : cfg.eigvecs) rows.push_back(numbers_to_json(row));
        design["eigvecs"] = rows;
    }

    json hyper;
    hyper["mu"] = number_to_json(cfg.hyper.mu);
    hyper["lambda"] = cfg.hyper.lambda;
    hyper["tau"] = cfg.hyper.tau;
    hyper["max_iter"] = cfg.hyper.max_iter;
    hyper["tol"] = cfg.hyper.tol;

    json plan;
    if (!cfg.plan.n_grid.empty()) {
        json ns = json::array();
        for (Index n : cfg.plan.n_grid) ns.push_back(static_cast<long long>(n));
        plan["n_grid"] = ns;
    }
    plan["lambda_grid"] = numbers_to_json(cfg.plan.lambda_grid);
    plan["mu_grid"] = numbers_to_json(cfg.plan.mu_grid);
    plan["tau_grid"] = numbers_to_json(cfg.plan.tau_grid);
    plan["lambda_multipliers"] = numbers_to_json(cfg.plan.lambda_multipliers);
    plan["replicates"] = cfg.plan.replicates;
    plan["base_seed"] = cfg.plan.base_seed;

    json bounds;
    bounds["c_x"] = cfg.bounds.c_x;
    bounds["sigma_psi1"] = cfg.bounds.sigma_psi1;
    bounds["delta"] = cfg.bounds.delta;

    json root;
    root["design"] = design;
    root["hyper"] = hyper;
    root["plan"] = plan;
    root["bounds"] = bounds;
    root["n"] = static_cast<long long>(cfg.n);
    root["estimator"] = to_string(cfg.estimator);
    root["lambda_opt"] = cfg.lambda_opt;
    root["output_dir"] = cfg.output_dir;
    root["seed"] = cfg.seed;
    root["workers"] = cfg.workers;
    root["full_scale"] = cfg.full_scale;
    if (!cfg.dump_data.empty()) root["dump_data"] = cfg.dump_data;
    return root.dump(2);
}

ValidatedSpec spec_from_config(const RunConfig& cfg) {
    Vector theta = Eigen::Map<const Vector>(cfg.theta.data(),
                                            static_cast<Index>(cfg.theta.size()));
    DesignSpec spec;
    spec.kind = cfg.kind;
    spec.dim = cfg.d;
    spec.theta_circ = theta;
    spec.noise_std = cfg.noise_std;
    if (cfg.kind != DesignKind::SineFeature) {
        spec.spectrum = Eigen::Map<const Vector>(cfg.spectrum.data(),
                                                 static_cast<Index>(cfg.spectrum.size()));
        if (!cfg.eigvecs.empty()) {
            Matrix v(static_cast<Index>(cfg.eigvecs.size()),
                     static_cast<Index>(cfg.eigvecs.front().size()));
            for (Index i = 0; i < v.rows(); ++i) {
                if (static_cast<Index>(cfg.eigvecs[static_cast<std::size_t>(i)].size()) !=
                    v.cols()) {
                    throw ValidationError("design.eigvecs: ragged rows");
                }
                for (Index j = 0; j < v.cols(); ++j) {
                    v(i, j) = cfg.eigvecs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                }
            }
            spec.eigvecs = std::move(v);
        }
    }
    return validate_spec(spec);
}

std::filesystem::path resolve_output_dir(const RunConfig& cfg) {
    if (!cfg.output_dir.empty()) {
        return cfg.output_dir;
    }
    if (const char* env = std::getenv("EIO_OUT_DIR"); env != nullptr && env[0] != '\0') {
        return env;
    }
    return ".";
}

void write_records(const std::vector<ExperimentRecord>& records,
                   const std::filesystem::path& path, CsvSchema schema) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (f == nullptr) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    auto row = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) std::fputc(',', f);
            std::fputs(cells[i].c_str(), f);
        }
        std::fputc('\n', f);
    };

    switch (schema) {
        case CsvSchema::Ratio:
            row({"experiment", "n", "d", "lambda", "mu", "replicates", "ratio_mean",
                 "ratio_sd", "flag"});
            for (const auto& rec : records) {
                row({rec.experiment, fmt_int(rec.param("n")), fmt_int(rec.param("d")),
                     fmt_float(rec.param("lambda")), fmt_float(rec.param("mu")),
                     std::to_string(rec.replicates),
                     rec.skipped ? "" : fmt_float(rec.statistic_mean),
                     rec.skipped ? "" : fmt_float(rec.statistic_sd),
                     rec.skipped ? "skipped" : ""});
            }
            break;
        case CsvSchema::Sweep:
            row({"experiment", "n", "d", "lambda", "mu", "tau", "risk_mean", "risk_sd"});
            for (const auto& rec : records) {
                row({rec.experiment, fmt_int(rec.param("n")), fmt_int(rec.param("d")),
                     fmt_float(rec.param("lambda")), fmt_float(rec.param("mu")),
                     fmt_float(rec.param("tau")),
                     rec.skipped ? "" : fmt_float(rec.statistic_mean),
                     rec.skipped ? "" : fmt_float(rec.statistic_sd)});
            }
            break;
        case CsvSchema::Concentration:
            row({"n", "d", "stat", "median", "q90", "bound_value"});
            for (const auto& rec : records) {
                row({fmt_int(rec.param("n")), fmt_int(rec.param("d")), rec.stat_label,
                     fmt_float(rec.statistic_mean), fmt_float(rec.statistic_q90),
                     fmt_float(rec.bound_value)});
            }
            break;
    }
    if (std::fclose(f) != 0) {
        throw IoError("failed to finalize " + path.string());
    }
}

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (f == nullptr) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    std::fputs(text.c_str(), f);
    std::fputc('\n', f);
    if (std::fclose(f) != 0) {
        throw IoError("failed to finalize " + path.string());
    }
}

void write_manifest(Command cmd, const RunConfig& cfg, const std::filesystem::path& out_dir,
                    const std::vector<std::string>& outputs, double wall_time_s,
                    const json& extras) {
    json manifest;
    manifest["command"] = to_string(cmd);
    manifest["config"] = json::parse(config_to_text(cfg));
    manifest["artifact_version"] = kArtifactVersion;
    manifest["compiler"] = std::string("gcc ") + __VERSION__;
    manifest["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                                std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION);
    manifest["outputs"] = outputs;
    manifest["wall_time_s"] = wall_time_s;
    if (!extras.is_null()) {
        manifest["results"] = extras;
    }
    write_text_file(out_dir / "manifest.json", manifest.dump(2));
}

void run_fit(const RunConfig& cfg, const ValidatedSpec& spec,
             const std::filesystem::path& out_dir, std::vector<std::string>& outputs) {
    RngStream rng(cfg.plan.base_seed, dataset_stream_id(cfg.n, 0));
    const Dataset data = gen_design(spec, cfg.n, rng);
    if (!cfg.dump_data.empty()) {
        write_dataset_csv(data, cfg.dump_data);
        outputs.push_back(cfg.dump_data);
    }
    const SufficientStats stats = sufficient_stats(data, spec);
    const FitReport fit = eio_fit(stats, cfg.hyper);
    const double risk = excess_risk(true_covariance(spec), fit.estimate.theta,
                                    spec.theta_circ());

    const auto path = out_dir / "fit.csv";
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (f == nullptr) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    std::fputs("n,d,mu,lambda,excess_risk,objective,iterations,converged\n", f);
    std::fprintf(f, "%lld,%lld,%s,%s,%s,%s,%d,%d\n", static_cast<long long>(cfg.n),
                 static_cast<long long>(cfg.d), fmt_float(cfg.hyper.mu).c_str(),
                 fmt_float(cfg.hyper.lambda).c_str(), fmt_float(risk).c_str(),
                 fmt_float(fit.objective_trace.back()).c_str(), fit.iterations,
                 fit.converged ? 1 : 0);
    if (std::fclose(f) != 0) {
        throw IoError("failed to finalize " + path.string());
    }
    outputs.push_back(path.filename().string());
}

}  // namespace

int run_command(Command cmd, const RunConfig& input) {
    try {
        RunConfig cfg = input;
        finalize_config(cfg);
        const ValidatedSpec spec = spec_from_config(cfg);
        const std::filesystem::path out_dir = resolve_output_dir(cfg);
        std::filesystem::create_directories(out_dir);

        const auto t0 = std::chrono::steady_clock::now();
        std::vector<std::string> outputs;
        json extras;

        SweepPlan plan = cfg.plan;
        if (plan.n_grid.empty()) {
            plan.n_grid = default_n_grid(cmd);
        }

        switch (cmd) {
            case Command::Fit: {
                run_fit(cfg, spec, out_dir, outputs);
                break;
            }
            case Command::RatioBias: {
                const auto records = ratio_bias_experiment(spec, cfg.hyper, plan.mu_grid,
                                                           plan.lambda_grid);
                write_records(records, out_dir / "ratio-bias.csv", CsvSchema::Ratio);
                outputs.push_back("ratio-bias.csv");
                break;
            }
            case Command::RatioVariance: {
                const auto records = ratio_variance_experiment(
                    spec, cfg.hyper, plan.n_grid, plan.lambda_grid, cfg.hyper.mu,
                    plan.replicates, plan.base_seed, cfg.lambda_opt, cfg.workers);
                write_records(records, out_dir / "ratio-variance.csv", CsvSchema::Ratio);
                outputs.push_back("ratio-variance.csv");
                break;
            }
            case Command::GridSearch: {
                const GridSearchResult res =
                    grid_search(spec, plan, cfg.estimator, cfg.n, cfg.hyper, cfg.workers);
                write_records(res.table, out_dir / "grid-search.csv", CsvSchema::Sweep);
                outputs.push_back("grid-search.csv");
                extras["estimator"] = to_string(cfg.estimator);
                for (const auto& [key, value] : res.best) {
                    extras["best_" + key] = number_to_json(value);
                }
                extras["best_risk"] = res.best_risk;
                break;
            }
            case Command::DoubleDescent: {
                const auto records = double_descent_sweep(spec, plan, cfg.hyper, cfg.workers);
                write_records(records, out_dir / "double-descent.csv", CsvSchema::Sweep);
                outputs.push_back("double-descent.csv");
                break;
            }
            case Command::RidgeCompare: {
                const auto records = ridge_comparison(spec, plan, cfg.hyper, cfg.workers);
                write_records(records, out_dir / "ridge-compare.csv", CsvSchema::Sweep);
                outputs.push_back("ridge-compare.csv");
                break;
            }
            case Command::ConcCheck: {
                const ConcentrationReport report = concentration_montecarlo(
                    spec, plan.n_grid, plan.replicates, cfg.bounds, plan.base_seed,
                    cfg.workers);
                write_records(report.records, out_dir / "conc-check.csv",
                              CsvSchema::Concentration);
                outputs.push_back("conc-check.csv");
                for (const auto& [label, slope] : report.slopes) {
                    extras["slope_" + label] = slope;
                }
                extras["min_c_x"] = report.min_c_x;
                break;
            }
        }

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_manifest(cmd, cfg, out_dir, outputs, wall, extras);

        std::string joined;
        for (const auto& name : outputs) {
            if (!joined.empty()) joined += ", ";
            joined += name;
        }
        std::fprintf(stdout, "%s: wrote %s in %s (%.2f s)\n", to_string(cmd).c_str(),
                     joined.c_str(), out_dir.string().c_str(), wall);
        return 0;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}

}  // namespace eio
