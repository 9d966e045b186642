#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "doctest.h"

#include "clinewave/cli.hpp"
#include "clinewave/error.hpp"

using namespace clinewave;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const char* kBenchmarkModel = R"("model": {"growth": {"type": "quadratic", "rmax": 1, "A": 0.25}, "B": 1})";

std::string config(const std::string& task, const std::string& extra = "") {
    return "{\"task\": \"" + task + "\", " + kBenchmarkModel + (extra.empty() ? "" : ", " + extra) + "}";
}

ConfigError config_error(const std::string& text, std::optional<Task> task = std::nullopt) {
    try {
        parse_config(text, task);
    } catch (const ConfigError& e) {
        return e;
    }
    FAIL("expected a configuration error");
    return ConfigError("", "");
}

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("clinewave_unit_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

// Runs the tool entry point with stdout and stderr captured.
int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "clinewave");
    std::vector<char*> argv;
    for (std::string& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    auto* o = std::cout.rdbuf(out.rdbuf());
    auto* e = std::cerr.rdbuf(err.rdbuf());
    const int code = cli_main(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(o);
    std::cerr.rdbuf(e);
    return code;
}

}  // namespace

TEST_CASE("config: defaults, comments and task selection") {
    const RunConfig c = parse_config("// benchmark\n" + config("eigen", R"("seed": 42)"));
    CHECK(c.task == Task::eigen);
    CHECK(c.seed == 42);
    CHECK(c.output_dir == "out");
    REQUIRE(c.model);
    CHECK(c.model->B == 1.0);
    CHECK(parse_config(config("wave"), Task::wave).wave.a == 30.0);

    const RunConfig w = parse_config(config("wave", R"("wave": {"mode": "fast", "n_x": 301, "n_z": 41, "dump": "binary"})"));
    CHECK(w.wave.mode == WaveTaskConfig::Mode::fast);
    CHECK(*w.wave.n_x == 301);
    CHECK(w.wave.dump == "binary");

    const RunConfig s = parse_config(config("simulate", R"("simulate": {"T": 5, "initial": {"type": "zero"}})"));
    CHECK(s.simulate.T == 5.0);
    CHECK(s.simulate.initial == "zero");
    CHECK(s.simulate.stencil == CrossStencil::monotone);
}

TEST_CASE("config: errors name the offending key") {
    auto e = config_error(R"({"task": "eigen"})");
    CHECK(e.kind() == "validation");
    CHECK(e.key() == "model");

    e = config_error("{\n  \"task\": \"eigen\",\n  oops\n}");
    CHECK(e.kind() == "parse");
    CHECK(e.key() == "line 3");

    e = config_error(R"({"task": "eigen", "model": {"growth": {"A": 0.25, "rmx": 1}, "B": 1}})");
    CHECK(e.key() == "model.growth.rmx");

    e = config_error(config("eigen"), Task::wave);
    CHECK(e.key() == "task");
    e = config_error(std::string("{") + kBenchmarkModel + "}");
    CHECK(e.key() == "task");
    e = config_error(config("fly"));
    CHECK(e.key() == "task");

    e = config_error(config("wave", R"("wave": {"n_x": 300})"));
    CHECK(e.key() == "wave.n_x");
    e = config_error(config("wave", R"("wave": {"tau": {"step": 0.5, "max_step": 0.25}})"));
    CHECK(e.key() == "wave.tau.step");
    e = config_error(config("simulate", R"("simulate": {"dt": -1})"));
    CHECK(e.key() == "simulate.dt");
    e = config_error(config("simulate", R"("simulate": {"stencil": "nine"})"));
    CHECK(e.key() == "simulate.stencil");
    e = config_error(config("sweep", R"("sweep": {"A": {"min": 1, "max": 0.5}})"));
    CHECK(e.key() == "sweep.A.max");
    e = config_error(R"({"task": "eigen", "model": {"growth": {"A": 0.25}, "B": "one"}})");
    CHECK(e.key() == "model.B");
    e = config_error(config("eigen", R"("seed": -3)"));
    CHECK(e.key() == "seed");
}

TEST_CASE("config: tabulated growth, gaussian kernel and biological parameters") {
    const RunConfig t = parse_config(R"({"task": "eigen", "model": {
        "growth": {"type": "tabulated", "z": [-4, -2, 0, 2, 4], "r": [-15, -3, 1, -3, -15], "delta": 0.5},
        "kernel": {"type": "gaussian", "base": 1, "amplitude": 0.5, "width": 2},
        "B": 0.5}})");
    CHECK(t.model->growth.as_tabulated() != nullptr);
    CHECK(t.model->kernel.lower() == doctest::Approx(1.0));
    CHECK(t.model->kernel.upper() == doctest::Approx(1.5));

    auto e = config_error(R"({"task": "eigen", "model": {"growth": {"A": 0.25}, "kernel": {"type": "gaussian", "base": -1, "amplitude": 0.5, "width": 2}, "B": 0}})");
    CHECK(e.key() == "model.kernel.type");

    const RunConfig b = parse_config(R"({"task": "eigen", "model": {"bio":
        {"sigma_x": 1.3, "sigma_m": 1.3, "r_max": 1, "V_s": 1, "b_cline": 0.7, "K_cap": 2}}})");
    CHECK(b.model->B == doctest::Approx(0.7));
    e = config_error(R"({"task": "eigen", "model": {"bio": {"sigma_x": 1}, "B": 1}})");
    CHECK(e.key() == "model.bio");
    e = config_error(R"({"task": "eigen", "model": {"bio":
        {"sigma_x": 0, "sigma_m": 1, "r_max": 1, "V_s": 1, "b_cline": 1, "K_cap": 1}}})");
    CHECK(e.key() == "model.bio");

    e = config_error(R"({"task": "sweep", "model": {
        "growth": {"type": "tabulated", "z": [-4, -2, 0, 2, 4], "r": [-15, -3, 1, -3, -15], "delta": 0.5}, "B": 0.5}})");
    CHECK(e.key() == "model.growth.type");
}

TEST_CASE("eigen task reproduces the closed form") {
    const fs::path d = scratch("eigen");
    const json r = run_task(parse_config(config("eigen")), d.string());
    CHECK(r["lambda"].get<double>() == doctest::Approx(std::sqrt(0.5) - 1.0).epsilon(1e-5));
    CHECK(r["lambda_closed_form"].get<double>() == doctest::Approx(std::sqrt(0.5) - 1.0));
    CHECK(r["c_star"].get<double>() == doctest::Approx(2.0 * std::sqrt((1.0 - std::sqrt(0.5)) / 2.0)).epsilon(1e-5));
    CHECK(r["classification"] == "invading");
    CHECK(fs::exists(d / "gamma.csv"));
}

TEST_CASE("sweep: single points and a small lattice") {
    SweepTaskConfig cfg;
    cfg.A_min = 0.5;
    cfg.A_max = 2.0;
    cfg.A_n = 2;
    cfg.B_min = 0.0;
    cfg.B_max = 0.0;
    cfg.B_n = 1;
    const ModelParams tmpl(GrowthProfile::quadratic(1.0, 1.0), Kernel::constant(1.0), 0.0);
    const SweepResult two = sweep(tmpl, cfg, 2);
    REQUIRE(two.rows.size() == 2);
    CHECK(two.rows[0].classification == "invading");
    CHECK(two.rows[0].c_star.has_value());
    CHECK(two.rows[1].classification == "extinct");
    CHECK(two.rows[1].lambda == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-5));

    SweepTaskConfig lat;
    lat.B_max = 1.0;
    lat.B_n = 3;
    const SweepResult a = sweep(tmpl, lat, 1);
    const SweepResult b = sweep(tmpl, lat, 3);
    CHECK(a.failures == 0);
    CHECK(a.mismatches == 0);
    CHECK(a.max_distance_cells <= 1.0);
    REQUIRE(a.boundary.size() == 3);
    CHECK(a.boundary[2].A_analytic == doctest::Approx(0.5));
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].A == b.rows[k].A);
        CHECK(a.rows[k].B == b.rows[k].B);
        CHECK(a.rows[k].lambda == b.rows[k].lambda);
        CHECK(a.rows[k].classification == b.rows[k].classification);
    }
    const ModelParams tab(GrowthProfile::tabulated({-2, 0, 2}, {-1, 1, -1}, 0.5), Kernel::constant(1.0), 0.0);
    CHECK_THROWS_AS(sweep(tab, lat, 1), ParameterError);
}

TEST_CASE("worker count follows the environment") {
    setenv("CLINEWAVE_WORKERS", "3", 1);
    CHECK(worker_count() == 3);
    setenv("CLINEWAVE_WORKERS", "zero", 1);
    CHECK(worker_count() >= 1);
    unsetenv("CLINEWAVE_WORKERS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("error json and exit codes") {
    CHECK(error_json(ClassificationError("x"))["error"]["kind"] == "classification");
    CHECK(error_json(SolverError("x"))["error"]["kind"] == "solver");
    CHECK(error_json(GridError("x"))["error"]["kind"] == "grid");
    CHECK(error_json(ParameterError("x"))["error"]["kind"] == "parameter");
    CHECK(error_json(std::runtime_error("x"))["error"]["kind"] == "internal");
    const json c = error_json(ConfigError("x", "validation", "model.B"));
    CHECK(c["status"] == "error");
    CHECK(c["error"]["key"] == "model.B");
    CHECK(exit_code(ConfigError("x", "parse")) == 2);
    CHECK(exit_code(SolverError("x")) == 3);
    CHECK(exit_code(std::runtime_error("x")) == 1);
}

TEST_CASE("tool entry point writes summary or error files") {
    const fs::path d = scratch("cli");
    const fs::path cfg = d / "eigen.json";
    std::ofstream(cfg) << config("eigen");
    const fs::path out = d / "ok";
    CHECK(run_cli({"eigen", "--config", cfg.string(), "--out", out.string()}) == 0);
    const json s = read_json(out / "summary.json");
    CHECK(s["status"] == "ok");
    CHECK(s["task"] == "eigen");
    CHECK(s["config"]["task"] == "eigen");
    CHECK(s["metadata"]["version"] == "0.1.0");
    CHECK(s["result"]["classification"] == "invading");

    const fs::path bad = d / "bad.json";
    std::ofstream(bad) << "{\"task\": \"eigen\"}";
    CHECK(run_cli({"eigen", "--config", bad.string(), "--out", (d / "bad").string()}) == 2);
    const json e = read_json(d / "bad" / "error.json");
    CHECK(e["status"] == "error");
    CHECK(e["error"]["key"] == "model");

    CHECK(run_cli({"eigen", "--config", (d / "missing.json").string(), "--out", (d / "m").string()}) == 2);

    const fs::path ext = d / "ext.json";
    std::ofstream(ext) << R"({"task": "wave", "model": {"growth": {"A": 2}, "B": 0}})";
    CHECK(run_cli({"wave", "--config", ext.string(), "--out", (d / "ext").string()}) == 3);
    CHECK(read_json(d / "ext" / "error.json")["error"]["kind"] == "classification");

    CHECK(run_cli({}) != 0);
    CHECK(run_cli({"eigen"}) != 0);
}

TEST_CASE("simulate task with the zero datum") {
    const fs::path d = scratch("sim");
    RunConfig c = parse_config(R"({"task": "simulate", "model": {"growth": {"A": 1}, "B": 1},
        "simulate": {"T": 1, "dt": 0.1, "h": 0.4, "a": 4, "initial": {"type": "zero"}, "dump_interval": 0.5}})");
    const json r = run_task(c, d.string());
    CHECK(r["regime"] == "extinction");
    CHECK(r["fit_ok"] == false);
    CHECK(r["rate"].is_null());
    CHECK_FALSE(r["flag"].get<std::string>().empty());
    CHECK(fs::exists(d / "timeseries.csv"));
}
