#pragma once

#include "eio/experiments.hpp"
#include "eio/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace eio {

enum class Command {
    Fit,
    RatioBias,
    RatioVariance,
    GridSearch,
    DoubleDescent,
    RidgeCompare,
    ConcCheck,
};

std::optional<Command> command_from_name(std::string_view name);
std::string to_string(Command cmd);

// Full run description: design, hyperparameters, sweep plan, bound constants
// and execution controls. Parsed from a JSON config file and/or CLI
// overrides; `finalize_config` materializes every default so that the
// parse -> serialize -> parse round trip is lossless.
struct RunConfig {
    DesignKind kind = DesignKind::SineFeature;
    Index d = 50;
    double noise_std = 0.09;
    std::vector<double> theta;                 // empty -> theta_k = k^{-3}
    std::vector<double> spectrum;              // empty -> all-ones (non-sine kinds)
    std::vector<std::vector<double>> eigvecs;  // empty -> identity

    Hyperparams hyper;    // mu = 1e8, lambda = 1, tau = 1
    SweepPlan plan;       // grids default to the standard search grids
    BoundConfig bounds;   // sigma_psi1 NaN -> noise_std

    Index n = 200;                               // single-dataset commands
    EstimatorKind estimator = EstimatorKind::Eio;  // grid-search target
    bool lambda_opt = false;                     // ratio-variance: lambda = lambda_opt(n)
    std::string output_dir;                      // "" -> $EIO_OUT_DIR -> "."
    std::uint64_t seed = 0;
    int workers = 0;                             // 0 -> hardware concurrency
    bool full_scale = false;                     // restore d = 200 and the full n grid
    std::string dump_data;                       // fit: optional dataset CSV path
};

RunConfig default_config();

// Fills every defaulted field (theta, spectrum, grids, base_seed, sigma_psi1)
// and validates; throws ValidationError naming the offending field.
void finalize_config(RunConfig& cfg);

// Applies the full-scale switch (d = 200, n in {50,...,500}); call before
// CLI per-parameter overrides so explicit flags win.
void apply_full_scale(RunConfig& cfg);

// Strict JSON, unknown keys rejected. `origin` names the source in errors.
// Accepts either a plain config or a manifest (whose "config" is unwrapped),
// so a run can be reproduced directly from its manifest.
RunConfig parse_config_text(const std::string& text, const std::string& origin,
                            bool finalize = true);
RunConfig parse_config_file(const std::filesystem::path& path, bool finalize = true);

std::string config_to_text(const RunConfig& cfg);

ValidatedSpec spec_from_config(const RunConfig& cfg);
std::filesystem::path resolve_output_dir(const RunConfig& cfg);

enum class CsvSchema { Ratio, Sweep, Concentration };

// Fixed column order, 17-significant-digit floats, LF endings; byte-identical
// across runs with equal inputs. Skipped statistics leave empty cells and set
// the flag column.
void write_records(const std::vector<ExperimentRecord>& records,
                   const std::filesystem::path& path, CsvSchema schema);

// Dispatch onto the experiment drivers; writes CSV outputs plus manifest.json
// (config echo, seed, versions, wall time). Returns the process exit code.
int run_command(Command cmd, const RunConfig& cfg);

}  // namespace eio
