#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sletip/cli.hpp"

using namespace sletip;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("sletip_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p);
    os << content;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config file parsing, overrides and errors") {
    const auto dir = fresh_dir("cfg");
    const auto cfg_path = dir / "run.cfg";

    write_file(cfg_path, "kappa=4\nn-samples=1234\nseed=9\n");
    ExperimentConfig cfg;
    std::ostringstream warn;
    config_load(cfg, cfg_path.string(), warn);
    REQUIRE(cfg.kappa == 4.0);
    REQUIRE(cfg.n_samples == 1234);
    REQUIRE(cfg.seed == 9);
    REQUIRE(warn.str().empty());

    // flags override the file
    config_set(cfg, "kappa", "2.5");
    REQUIRE(cfg.kappa == 2.5);

    // duplicate key: last wins, with a warning
    write_file(cfg_path, "kappa=4\nkappa=5\n");
    ExperimentConfig dup;
    std::ostringstream warn2;
    config_load(dup, cfg_path.string(), warn2);
    REQUIRE(dup.kappa == 5.0);
    REQUIRE(warn2.str().find("duplicate key 'kappa'") != std::string::npos);

    // malformed number names the key and line
    write_file(cfg_path, "kappa=abc\n");
    ExperimentConfig bad;
    try {
        config_load(bad, cfg_path.string());
        FAIL("expected config_error");
    } catch (const config_error& e) {
        REQUIRE(std::string(e.what()).find("kappa") != std::string::npos);
        REQUIRE(std::string(e.what()).find(":1") != std::string::npos);
    }

    // unknown keys are rejected
    write_file(cfg_path, "kapa=2\n");
    ExperimentConfig unk;
    REQUIRE_THROWS_AS(config_load(unk, cfg_path.string()), config_error);

    // empty file leaves defaults in place
    write_file(cfg_path, "");
    ExperimentConfig empty;
    config_load(empty, cfg_path.string());
    REQUIRE(empty.kappa == 2.0);
}

TEST_CASE("environment variable beats flags for the seed") {
    ExperimentConfig cfg;
    config_set(cfg, "seed", "5");
    setenv("SLE_TIP_SEED", "777", 1);
    apply_env_overrides(cfg);
    unsetenv("SLE_TIP_SEED");
    REQUIRE(cfg.seed == 777);
}

TEST_CASE("config hash ignores output location but tracks physics") {
    ExperimentConfig a, b;
    a.output_dir = "x";
    b.output_dir = "y";
    b.threads = 7;
    REQUIRE(config_hash(a) == config_hash(b));
    b.kappa = 3.0;
    REQUIRE(config_hash(a) != config_hash(b));
}

TEST_CASE("validation rejects out-of-domain configs") {
    ExperimentConfig cfg;
    cfg.dt = 0.0;
    REQUIRE_THROWS_AS(config_validate(cfg), config_error);
    cfg = ExperimentConfig{};
    cfg.command = Command::solve_fpk;
    cfg.nx = 10;
    REQUIRE_THROWS_AS(config_validate(cfg), config_error);
    cfg = ExperimentConfig{};
    cfg.command = Command::occupation;
    cfg.u_lo = 2.0;
    cfg.u_hi = 1.0;
    REQUIRE_THROWS_AS(config_validate(cfg), config_error);
}

TEST_CASE("simulate at kappa = 0 writes 100 near-identical samples") {
    const auto out = fresh_dir("sim0");
    ExperimentConfig cfg;
    cfg.command = Command::simulate;
    cfg.kappa = 0.0;
    cfg.n_samples = 100;
    cfg.t_horizon = 1000.0;
    cfg.output_dir = out.string();
    std::ostringstream log;
    const auto rr = run(cfg, log);
    REQUIRE(rr.exit_code == 0);
    const auto set = read_samples_csv_file(rr.artifact_dir + "/samples.csv");
    REQUIRE(set.n_samples == 100);
    for (std::int64_t i = 0; i < set.n_samples; ++i) {
        REQUIRE(set.x[std::size_t(i)] == 0.0);
        REQUIRE(std::abs(set.y[std::size_t(i)] - 2.0) < 2e-3);
    }
    REQUIRE(fs::exists(rr.artifact_dir + "/manifest.cfg"));

    // a second run with the same config is a no-op (no artifact mutation)
    std::error_code ec;
    const auto before = fs::last_write_time(rr.artifact_dir + "/samples.csv", ec);
    std::ostringstream log2;
    const auto rr2 = run(cfg, log2);
    REQUIRE(log2.str().find("already present") != std::string::npos);
    const auto after = fs::last_write_time(rr.artifact_dir + "/samples.csv", ec);
    REQUIRE(before == after);
}

TEST_CASE("manifest round trip reproduces artifacts bit-for-bit") {
    const auto out1 = fresh_dir("mrt1");
    ExperimentConfig cfg;
    cfg.command = Command::simulate;
    cfg.kappa = 2.0;
    cfg.n_samples = 500;
    cfg.t_horizon = 50.0;
    cfg.dt = 1e-2;
    cfg.seed = 31;
    cfg.output_dir = out1.string();
    std::ostringstream log;
    const auto rr1 = run(cfg, log);

    // load the manifest as a config into a fresh output dir and re-run
    const auto out2 = fresh_dir("mrt2");
    ExperimentConfig cfg2;
    config_load(cfg2, rr1.artifact_dir + "/manifest.cfg");
    cfg2.output_dir = out2.string();
    const auto rr2 = run(cfg2, log);

    REQUIRE(slurp(rr1.artifact_dir + "/samples.csv") == slurp(rr2.artifact_dir + "/samples.csv"));
}

TEST_CASE("plot emits an SVG scatter in Figure-1 coordinates") {
    const auto out = fresh_dir("plot");
    // reuse a simulated sample file as plot input
    ExperimentConfig sim;
    sim.command = Command::simulate;
    sim.kappa = 2.0;
    sim.n_samples = 2000;
    sim.t_horizon = 50.0;
    sim.dt = 1e-2;
    sim.output_dir = out.string();
    std::ostringstream log;
    const auto rs = run(sim, log);

    ExperimentConfig plot;
    plot.command = Command::plot;
    plot.input = rs.artifact_dir + "/samples.csv";
    plot.chart = Chart::alpha_im;
    plot.output_dir = out.string();
    const auto rp = run(plot, log);
    const std::string svg = slurp(rp.artifact_dir + "/plot.svg");
    REQUIRE(svg.find("<svg") != std::string::npos);
    REQUIRE(svg.find("viewBox") != std::string::npos);
    REQUIRE(svg.find("alpha") != std::string::npos);
    REQUIRE(svg.find("circle") != std::string::npos);
    REQUIRE(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("moments command writes a json report with references") {
    const auto out = fresh_dir("mom");
    ExperimentConfig cfg;
    cfg.command = Command::moments;
    cfg.kappa = 2.0;
    cfg.n_samples = 20000;
    cfg.t_horizon = 100.0;
    cfg.output_dir = out.string();
    std::ostringstream log;
    const auto rr = run(cfg, log);
    const std::string body = slurp(rr.artifact_dir + "/moments.json");
    const auto j = nlohmann::json::parse(body);
    REQUIRE(j.is_array());
    REQUIRE(j[0]["name"] == "E(Im gamma_1)^-2");
    REQUIRE(j[0].contains("estimate"));
    REQUIRE(j[0].contains("z_score"));
    REQUIRE(std::abs(j[0]["reference"].get<double>() - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("verify prints a pass/fail table and records the checks") {
    const auto out = fresh_dir("verify");
    ExperimentConfig cfg;
    cfg.command = Command::verify;
    cfg.kappa = 2.0;
    cfg.n_samples = 20000;
    cfg.t_horizon = 1000.0;
    cfg.output_dir = out.string();
    std::ostringstream log;
    const auto rr = run(cfg, log);
    REQUIRE(rr.exit_code == 0); // all oracle checks pass at this sample size
    REQUIRE(log.str().find("pass") != std::string::npos);
    REQUIRE(log.str().find("alpha-marginal slope") != std::string::npos);
    const auto j = nlohmann::json::parse(slurp(rr.artifact_dir + "/verify.json"));
    REQUIRE(j.is_array());
    REQUIRE(j.size() >= 6);
    for (const auto& c : j) REQUIRE(c["pass"].get<bool>());
}

TEST_CASE("solve-fpk artifacts and a heatmap plot") {
    const auto out = fresh_dir("fpkcli");
    ExperimentConfig cfg;
    cfg.command = Command::solve_fpk;
    cfg.kappa = 2.0;
    cfg.nx = 50;
    cfg.ny = 50;
    cfg.z_min = -3.0;
    cfg.output_dir = out.string();
    std::ostringstream log;
    const auto rr = run(cfg, log);
    REQUIRE(rr.exit_code == 0);
    const auto grid = read_grid_file(rr.artifact_dir + "/density.grid");
    REQUIRE(grid.n1 == 50);
    REQUIRE(std::abs(grid.mass() - 1.0) < 1e-9);

    ExperimentConfig plot;
    plot.command = Command::plot;
    plot.input = rr.artifact_dir + "/density.grid";
    plot.output_dir = out.string();
    const auto rp = run(plot, log);
    const std::string svg = slurp(rp.artifact_dir + "/plot.svg");
    REQUIRE(svg.find("<rect") != std::string::npos);
    REQUIRE(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("locked output directory is reported as a validation error") {
    const auto out = fresh_dir("lock");
    ExperimentConfig cfg;
    cfg.command = Command::simulate;
    cfg.kappa = 0.0;
    cfg.n_samples = 1;
    cfg.t_horizon = 10.0;
    cfg.output_dir = out.string();
    const fs::path sub = fs::path(out) / ("simulate-" + config_hash(cfg));
    fs::create_directories(sub);
    write_file(sub / ".lock", "");
    std::ostringstream log;
    REQUIRE_THROWS_AS(run(cfg, log), config_error);
}
