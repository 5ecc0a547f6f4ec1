#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "eio/io.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace eio;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("empty config yields the documented defaults") {
    const RunConfig cfg = parse_config_text("{}", "test");
    CHECK(cfg.d == 50);
    CHECK(cfg.noise_std == 0.09);
    CHECK(cfg.hyper.mu == 1e8);
    CHECK(cfg.plan.replicates == 40);
    CHECK(cfg.seed == 0);
    CHECK(cfg.kind == DesignKind::SineFeature);
    CHECK(cfg.estimator == EstimatorKind::Eio);
    CHECK(cfg.theta.size() == 50);
    CHECK(cfg.theta[0] == 1.0);
    CHECK(cfg.theta[7] == doctest::Approx(std::pow(8.0, -3.0)).epsilon(1e-15));
    CHECK(cfg.plan.lambda_grid.size() == 80);
    CHECK(cfg.plan.lambda_grid.front() == doctest::Approx(std::pow(1.3, -40)).epsilon(1e-12));
    CHECK(cfg.plan.mu_grid.size() == 30);
    CHECK(cfg.bounds.sigma_psi1 == 0.09);  // defaults to noise_std
}

TEST_CASE("mu accepts the inf sentinel") {
    const RunConfig cfg = parse_config_text(R"({"hyper": {"mu": "inf"}})", "test");
    CHECK(cfg.hyper.mu_infinite());
}

TEST_CASE("invalid dimensions and unknown keys are rejected") {
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"design": {"d": 0}})", "test"),
                         doctest::Contains("dim must be >= 1"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"desing": {}})", "test"),
                         doctest::Contains("unknown key"), ValidationError);
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"hyper": {"mv": 1}})", "test"),
                         doctest::Contains("unknown key"), ValidationError);
}

TEST_CASE("parse errors carry line and column") {
    try {
        parse_config_text("{\n  \"design\": }", "test");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("parse / serialize round trip is lossless") {
    const std::string input = R"({
        "design": {"kind": "gaussian", "d": 4, "noise_std": 0.2,
                   "spectrum": [2.0, 1.5, 1.0, 0.5]},
        "hyper": {"mu": "inf", "lambda": 0.25},
        "plan": {"replicates": 7, "n_grid": [30, 60]},
        "seed": 9
    })";
    const RunConfig cfg = parse_config_text(input, "test");
    const std::string once = config_to_text(cfg);
    const RunConfig reparsed = parse_config_text(once, "test");
    const std::string twice = config_to_text(reparsed);
    CHECK(once == twice);
    CHECK(reparsed.hyper.mu_infinite());
    CHECK(reparsed.plan.base_seed == 9);
}

TEST_CASE("record writer emits fixed schemas byte for byte") {
    const fs::path dir = fresh_dir("eio_io_writer");

    SUBCASE("empty list gives a header-only file") {
        write_records({}, dir / "empty.csv", CsvSchema::Ratio);
        CHECK(slurp(dir / "empty.csv") ==
              "experiment,n,d,lambda,mu,replicates,ratio_mean,ratio_sd,flag\n");
    }

    SUBCASE("skipped records leave empty cells and set the flag") {
        ExperimentRecord rec;
        rec.experiment = "ratio-variance";
        rec.parameters = {{"n", 100.0}, {"d", 5.0}, {"lambda", 0.5}, {"mu", kMuInfinity}};
        rec.replicates = 0;
        rec.skipped = true;
        write_records({rec}, dir / "skipped.csv", CsvSchema::Ratio);
        CHECK(slurp(dir / "skipped.csv") ==
              "experiment,n,d,lambda,mu,replicates,ratio_mean,ratio_sd,flag\n"
              "ratio-variance,100,5,0.5,inf,0,,,skipped\n");
    }

    SUBCASE("two writes of the same records are identical") {
        ExperimentRecord rec;
        rec.experiment = "grid-search/eio";
        rec.parameters = {{"n", 60.0}, {"d", 5.0}, {"lambda", 1.0 / 3.0}, {"mu", 1024.0}};
        rec.statistic_mean = 0.123456789012345678;
        rec.statistic_sd = 1e-300;
        rec.replicates = 4;
        write_records({rec}, dir / "a.csv", CsvSchema::Sweep);
        write_records({rec}, dir / "b.csv", CsvSchema::Sweep);
        CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
        // 17 significant digits round-trip through text
        const std::string text = slurp(dir / "a.csv");
        CHECK(text.find("0.12345678901234568") != std::string::npos);
    }

    SUBCASE("concentration schema") {
        ExperimentRecord rec;
        rec.experiment = "conc-check";
        rec.stat_label = "cov_op";
        rec.parameters = {{"n", 250.0}, {"d", 20.0}};
        rec.statistic_mean = 0.5;
        rec.statistic_q90 = 0.75;
        rec.bound_value = 2.0;
        write_records({rec}, dir / "conc.csv", CsvSchema::Concentration);
        CHECK(slurp(dir / "conc.csv") ==
              "n,d,stat,median,q90,bound_value\n250,20,cov_op,0.5,0.75,2\n");
    }
}

TEST_CASE("fit command writes a single-row csv and a manifest") {
    const fs::path dir = fresh_dir("eio_io_fit");
    RunConfig cfg = default_config();
    cfg.d = 8;
    cfg.n = 60;
    cfg.output_dir = dir.string();
    cfg.dump_data = (dir / "data.csv").string();
    REQUIRE(run_command(Command::Fit, cfg) == 0);

    const std::string csv = slurp(dir / "fit.csv");
    CHECK(csv.find("n,d,mu,lambda,excess_risk,objective,iterations,converged\n") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.find("60,8,") != std::string::npos);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "data.csv"));
}

TEST_CASE("ratio-bias row count equals the grid cardinality") {
    const fs::path dir = fresh_dir("eio_io_ratio_bias");
    RunConfig cfg = default_config();
    cfg.d = 10;
    cfg.output_dir = dir.string();
    cfg.plan.mu_grid = {1e6, 1e8};
    cfg.plan.lambda_grid = {0.5, 1.0, 2.0};
    REQUIRE(run_command(Command::RatioBias, cfg) == 0);
    const std::string csv = slurp(dir / "ratio-bias.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3);
}

TEST_CASE("experiment outputs are byte-identical across reruns and worker counts") {
    RunConfig cfg = default_config();
    cfg.d = 6;
    cfg.plan.n_grid = {40};
    cfg.plan.lambda_grid = {0.5, 1.0};
    cfg.plan.replicates = 6;
    cfg.seed = 5;
    cfg.plan.base_seed = 5;

    const fs::path dir1 = fresh_dir("eio_io_det1");
    const fs::path dir2 = fresh_dir("eio_io_det2");
    const fs::path dir3 = fresh_dir("eio_io_det3");

    cfg.output_dir = dir1.string();
    cfg.workers = 1;
    REQUIRE(run_command(Command::RatioVariance, cfg) == 0);
    cfg.output_dir = dir2.string();
    cfg.workers = 2;
    REQUIRE(run_command(Command::RatioVariance, cfg) == 0);
    cfg.output_dir = dir3.string();
    cfg.workers = 1;
    cfg.seed = 6;
    cfg.plan.base_seed = 6;
    REQUIRE(run_command(Command::RatioVariance, cfg) == 0);

    CHECK(slurp(dir1 / "ratio-variance.csv") == slurp(dir2 / "ratio-variance.csv"));
    CHECK(slurp(dir1 / "ratio-variance.csv") != slurp(dir3 / "ratio-variance.csv"));
}

TEST_CASE("a manifest reproduces its run byte for byte") {
    const fs::path dir1 = fresh_dir("eio_io_manifest1");
    RunConfig cfg = default_config();
    cfg.d = 6;
    cfg.output_dir = dir1.string();
    cfg.plan.mu_grid = {1e8, kMuInfinity};
    cfg.plan.lambda_grid = {0.5, 1.0};
    REQUIRE(run_command(Command::RatioBias, cfg) == 0);

    const fs::path dir2 = fresh_dir("eio_io_manifest2");
    RunConfig replay = parse_config_file(dir1 / "manifest.json");
    replay.output_dir = dir2.string();
    REQUIRE(run_command(Command::RatioBias, replay) == 0);
    CHECK(slurp(dir1 / "ratio-bias.csv") == slurp(dir2 / "ratio-bias.csv"));
}

TEST_CASE("output directory falls back to EIO_OUT_DIR") {
    const fs::path dir = fresh_dir("eio_io_env");
    setenv("EIO_OUT_DIR", dir.string().c_str(), 1);
    RunConfig cfg = default_config();
    CHECK(resolve_output_dir(cfg) == dir);
    cfg.output_dir = "explicit";
    CHECK(resolve_output_dir(cfg) == fs::path("explicit"));
    unsetenv("EIO_OUT_DIR");
    cfg.output_dir.clear();
    CHECK(resolve_output_dir(cfg) == fs::path("."));
}

TEST_CASE("command names round trip") {
    for (const char* name : {"fit", "ratio-bias", "ratio-variance", "grid-search",
                             "double-descent", "ridge-compare", "conc-check"}) {
        const auto cmd = command_from_name(name);
        REQUIRE(cmd.has_value());
        CHECK(to_string(*cmd) == name);
    }
    CHECK_FALSE(command_from_name("bogus").has_value());
}

TEST_CASE("grid-search command records the best point in the manifest") {
    const fs::path dir = fresh_dir("eio_io_grid");
    RunConfig cfg = default_config();
    cfg.d = 6;
    cfg.n = 40;
    cfg.output_dir = dir.string();
    cfg.estimator = EstimatorKind::PlugIn;
    cfg.plan.lambda_grid = {0.01, 0.1, 1.0};
    cfg.plan.replicates = 4;
    REQUIRE(run_command(Command::GridSearch, cfg) == 0);
    const std::string manifest = slurp(dir / "manifest.json");
    CHECK(manifest.find("best_lambda") != std::string::npos);
    const std::string csv = slurp(dir / "grid-search.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 3);
}
