#include "clinewave/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "clinewave/error.hpp"

namespace clinewave {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << std::setprecision(17);
    return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json grid_json(const Grid2D& g) {
    return {{"a", g.a()}, {"b", g.b()}, {"n_x", g.nx()}, {"n_z", g.nz()}, {"h_x", g.x().spacing()}, {"h_z", g.z().spacing()}};
}

void write_field_csv(const fs::path& p, const Grid2D& g, const Field& u) {
    std::ofstream out = open_out(p);
    out << "x,z,u\n";
    for (int i = 0; i < g.nx(); ++i)
        for (int j = 0; j < g.nz(); ++j) out << g.x().node(i) << ',' << g.z().node(j) << ',' << u(i, j) << '\n';
}

json dump_field(const fs::path& dir, const std::string& stem, const std::string& format, const Grid2D& g,
                const Field& u) {
    if (format == "none") return nullptr;
    if (format == "csv") {
        write_field_csv(dir / (stem + ".csv"), g, u);
        return {{"file", stem + ".csv"}, {"format", "csv"}, {"columns", {"x", "z", "u"}}};
    }
    const fs::path p = dir / (stem + ".bin");
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out.write(reinterpret_cast<const char*>(u.data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
    return {{"file", stem + ".bin"}, {"format", "float64 little-endian"}, {"order", "x-major: index i * n_z + j"},
            {"n_x", g.nx()}, {"n_z", g.nz()}};
}

json diagnostics_json(const DiagnosticReport& d) {
    json checks = json::array();
    for (const BoundCheck& c : d.checks)
        checks.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"slack", c.slack},
                          {"error", c.error}, {"pass", c.pass}});
    return {{"pass", d.ok()},
            {"checks", checks},
            {"warnings", d.warnings},
            {"mass_bound", d.mass_bound},
            {"sup_bound", d.sup_bound},
            {"tail_constant", d.tail_constant},
            {"c_bar", d.c_bar},
            {"tail_violations", d.tail_violations},
            {"left_floor", d.left_floor},
            {"right_sup_ratio", d.right_sup_ratio},
            {"right_mass_ratio", d.right_mass_ratio},
            {"min_value", d.min_value},
            {"discretization_error", d.discretization_error}};
}

json run_eigen(const RunConfig& cfg, const fs::path& dir) {
    const ModelParams& p = *cfg.model;
    const EigenPair pair = solve_line(p, 0.0, cfg.eigen.line);
    const Regime regime = classify(p, cfg.eigen.classify);
    json c_star = nullptr;
    if (const auto* inv = std::get_if<Invading>(&regime)) c_star = inv->c_star;
    if (std::holds_alternative<Marginal>(regime)) c_star = 0.0;
    json out = {{"lambda", pair.lambda},
                {"lambda_richardson", regime_lambda(regime)},
                {"classification", regime_name(regime)},
                {"c_star", c_star},
                {"residual", pair.residual},
                {"grid", {{"h", pair.grid.spacing()}, {"half_width", pair.half_width()}, {"n", pair.grid.size()}}}};
    if (const QuadraticGrowth* q = p.growth.as_quadratic())
        out["lambda_closed_form"] = std::sqrt(q->A * p.diffusion()) - q->rmax;
    if (cfg.eigen.profile_csv) {
        std::ofstream f = open_out(dir / "gamma.csv");
        f << "z,gamma\n";
        for (int i = 0; i < pair.grid.size(); ++i) f << pair.grid.node(i) << ',' << pair.gamma[i] << '\n';
        out["profile"] = "gamma.csv";
    }
    return out;
}

Grid2D wave_box(const WaveTaskConfig& w) {
    if (w.n_x && w.n_z) return Grid2D(w.a, w.b, *w.n_x, *w.n_z);
    Grid2D g = box_grid(w.a, w.b, w.h, w.h);
    return Grid2D(w.a, w.b, w.n_x.value_or(g.nx()), w.n_z.value_or(g.nz()));
}

json run_wave(const RunConfig& cfg, const fs::path& dir) {
    const ModelParams& p = *cfg.model;
    const WaveTaskConfig& w = cfg.wave;
    const PrincipalProfile prof = principal_profile(p);
    if (!(prof.lambda < 0.0)) {
        std::ostringstream os;
        os << "wave: lambda=" << prof.lambda << " >= 0, the population does not invade";
        throw ClassificationError(os.str());
    }
    const double c_star = 2.0 * std::sqrt(-prof.lambda / p.diffusion());

    if (w.mode == WaveTaskConfig::Mode::fast) {
        const double c = w.c.value_or(w.c_factor * c_star);
        const Grid2D g = wave_box(w);
        const FastWaveResult r = solve_fast_wave(p, c, g, w.fast);
        const double lo = (r.lower - r.solution.u).maxCoeff();
        const double hi = (r.solution.u - r.upper).maxCoeff();
        return {{"mode", "fast"},
                {"c", c},
                {"c_star", c_star},
                {"epsilon", r.solution.epsilon},
                {"tau", r.solution.tau},
                {"residual", r.solution.residual},
                {"iterations", r.iterations},
                {"mu", r.mu},
                {"eps", r.eps},
                {"A", r.A},
                {"max_clip", r.max_clip},
                {"sandwich", {{"max_below_lower", lo}, {"max_above_upper", hi}, {"pass", lo <= 0.0 && hi <= 0.0}}},
                {"diagnostics", diagnostics_json(r.solution.diagnostics)},
                {"grid", grid_json(g)},
                {"dump", dump_field(dir, "u", w.dump, g, r.solution.u)}};
    }

    json ladder = nullptr;
    std::optional<WaveSolution> sol;
    if (w.ladder) {
        StripResult r = refine_to_strip(p, w.strip);
        json rungs = json::array();
        for (const StripRung& k : r.rungs) rungs.push_back({{"a", k.a}, {"b", k.b}});
        ladder = {{"c_history", r.c_history}, {"rungs", rungs}, {"converged", r.converged}};
        sol = std::move(r.solution);
    } else {
        sol = solve_box_homotopy(p, wave_box(w), w.homotopy);
    }
    return {{"mode", "minimal"},
            {"c", sol->c},
            {"c_star", c_star},
            {"relative_error", (sol->c - c_star) / c_star},
            {"epsilon", sol->epsilon},
            {"tau", sol->tau},
            {"residual", sol->residual},
            {"newton_iterations", sol->newton_iterations},
            {"diagnostics", diagnostics_json(sol->diagnostics)},
            {"ladder", ladder},
            {"grid", grid_json(sol->grid)},
            {"dump", dump_field(dir, "u", w.dump, sol->grid, sol->u)}};
}

json run_simulate(const RunConfig& cfg, const fs::path& dir) {
    const ModelParams& p = *cfg.model;
    const SimulateTaskConfig& s = cfg.simulate;
    const Regime regime = classify(p);
    std::string mode = s.regime;
    if (mode == "auto") {
        if (std::holds_alternative<Invading>(regime)) mode = "invasion";
        else if (std::holds_alternative<Extinct>(regime)) mode = "extinction";
        else throw ClassificationError("simulate: the model is marginal; choose simulate.regime explicitly");
    }
    const StepScheme scheme{s.dt, s.stencil};

    json dumps = json::array();
    double next_dump = 0.0;
    auto observer = [&](const SimState& st) {
        if (s.dump_interval <= 0.0 || st.t + 1e-9 < next_dump) return;
        char name[32];
        std::snprintf(name, sizeof name, "field_%06ld.csv", st.steps);
        write_field_csv(dir / name, st.grid, st.field);
        dumps.push_back({{"t", st.t}, {"file", name}});
        next_dump += s.dump_interval;
    };
    auto write_series = [&](const SimState& st) {
        std::ofstream f = open_out(dir / "timeseries.csv");
        f << "t,front,sup_ratio,mass\n";
        for (const Sample& sm : st.history) {
            f << sm.t << ',';
            if (std::isfinite(sm.front)) f << sm.front;
            f << ',' << sm.sup_ratio << ',' << sm.mass << '\n';
        }
    };

    if (mode == "invasion") {
        const auto* inv = std::get_if<Invading>(&regime);
        const double cs = inv ? inv->c_star : 0.0;
        const double a = s.a.value_or(0.5 * (s.plateau_length + cs * s.T + 15.0));
        const Grid2D g = simulation_grid(p, a, s.h);
        InvasionConfig ic;
        ic.T = s.T;
        ic.theta = s.theta;
        ic.output_interval = s.output_interval;
        ic.plateau_length = s.plateau_length;
        ic.amplitude = s.initial == "zero" ? std::optional<double>(0.0) : s.amplitude;
        ic.observer = observer;
        const InvasionResult r = run_invasion(p, g, scheme, ic);
        write_series(r.state);
        return {{"regime", "invasion"},
                {"speed", r.speed},
                {"r2", r.r2},
                {"c_star", r.c_star},
                {"relative_error", (r.speed - r.c_star) / r.c_star},
                {"theta", s.theta},
                {"steps", r.state.steps},
                {"max_clip_fraction", r.state.max_clip_fraction},
                {"grid", grid_json(g)},
                {"timeseries", "timeseries.csv"},
                {"dumps", dumps}};
    }
    const double a = s.a.value_or(20.0);
    const Grid2D g = simulation_grid(p, a, s.h);
    ExtinctionConfig ec;
    ec.T = s.T;
    ec.output_interval = s.output_interval;
    ec.amplitude = s.initial == "zero" ? std::optional<double>(0.0) : s.amplitude;
    ec.observer = observer;
    const ExtinctionResult r = run_extinction(p, g, scheme, ec);
    write_series(r.state);
    return {{"regime", "extinction"},
            {"rate", r.fit_ok ? json(r.rate) : json(nullptr)},
            {"r2", r.fit_ok ? json(r.r2) : json(nullptr)},
            {"lambda", r.lambda},
            {"relative_error", r.fit_ok ? json((r.rate - r.lambda) / r.lambda) : json(nullptr)},
            {"fit_ok", r.fit_ok},
            {"flag", r.flag},
            {"max_ratio_increase", r.max_ratio_increase},
            {"steps", r.state.steps},
            {"max_clip_fraction", r.state.max_clip_fraction},
            {"grid", grid_json(g)},
            {"timeseries", "timeseries.csv"},
            {"dumps", dumps}};
}

json run_sweep(const RunConfig& cfg, const fs::path& dir) {
    const int workers = worker_count();
    const SweepResult r = sweep(*cfg.model, cfg.sweep, workers);
    {
        std::ofstream f = open_out(dir / "sweep.csv");
        f << "A,B,lambda,classification,c_star,error\n";
        for (const SweepRow& row : r.rows) {
            f << row.A << ',' << row.B << ',';
            if (std::isfinite(row.lambda)) f << row.lambda;
            f << ',' << row.classification << ',';
            if (row.c_star) f << *row.c_star;
            f << ',' << row.error << '\n';
        }
    }
    {
        std::ofstream f = open_out(dir / "boundary.csv");
        f << "B,A_empirical,A_analytic,distance_cells\n";
        for (const BoundarySample& b : r.boundary) {
            f << b.B << ',';
            if (b.A_empirical) f << *b.A_empirical;
            f << ',' << b.A_analytic << ',';
            if (std::isfinite(b.distance_cells)) f << b.distance_cells;
            f << '\n';
        }
    }
    return {{"points", r.rows.size()},
            {"failures", r.failures},
            {"mismatches", r.mismatches},
            {"lattice_dA", r.dA},
            {"max_boundary_distance_cells", finite_or_null(r.max_distance_cells)},
            {"within_one_cell", r.max_distance_cells <= 1.0},
            {"table", "sweep.csv"},
            {"boundary", "boundary.csv"}};
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

int worker_count() {
    if (const char* env = std::getenv("CLINEWAVE_WORKERS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && n >= 1) return static_cast<int>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult sweep(const ModelParams& tmpl, const SweepTaskConfig& cfg, int workers) {
    const QuadraticGrowth* q = tmpl.growth.as_quadratic();
    if (!q) throw ParameterError("sweep: the template needs a quadratic growth profile");
    const double rmax = q->rmax;
    const int na = cfg.A_n, nb = cfg.B_n;
    if (na < 1 || nb < 1) throw ParameterError("sweep: empty lattice");
    auto axis = [](double lo, double hi, int n, int k) { return n == 1 ? lo : lo + (hi - lo) * k / (n - 1); };

    SweepResult out;
    out.rows.resize(static_cast<std::size_t>(na) * nb);
    out.dA = na > 1 ? (cfg.A_max - cfg.A_min) / (na - 1) : 0.0;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < out.rows.size(); k = next++) {
            const double A = axis(cfg.A_min, cfg.A_max, na, static_cast<int>(k % na));
            const double B = axis(cfg.B_min, cfg.B_max, nb, static_cast<int>(k / na));
            SweepRow row{A, B, std::nan(""), "error", std::nullopt, {}};
            try {
                const ModelParams p(GrowthProfile::quadratic(rmax, A), tmpl.kernel, B);
                const Regime r = classify(p, cfg.classify);
                row.lambda = regime_lambda(r);
                row.classification = regime_name(r);
                if (const auto* inv = std::get_if<Invading>(&r)) row.c_star = inv->c_star;
                if (std::holds_alternative<Marginal>(r)) row.c_star = 0.0;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
            out.rows[k] = std::move(row);
        }
    };
    const int n_threads = std::clamp(workers, 1, static_cast<int>(out.rows.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
    for (std::thread& t : pool) t.join();

    out.failures = 0;
    out.mismatches = 0;
    for (const SweepRow& row : out.rows) {
        if (!row.error.empty()) {
            ++out.failures;
            continue;
        }
        const double exact = std::sqrt(row.A * (row.B * row.B + 1.0)) - rmax;
        const char* expect = std::abs(exact) <= cfg.classify.marginal_tol ? "marginal" : exact > 0.0 ? "extinct" : "invading";
        if (row.classification != expect) ++out.mismatches;
    }

    // Sign of lambda with the marginal band counted as zero.
    auto sign = [&](const SweepRow& r) {
        return r.classification == "invading" ? -1 : r.classification == "extinct" ? 1 : 0;
    };
    out.max_distance_cells = 0.0;
    for (int jb = 0; jb < nb; ++jb) {
        const SweepRow* row = &out.rows[static_cast<std::size_t>(jb) * na];
        const double B = row[0].B;
        BoundarySample s{B, std::nullopt, rmax * rmax / (B * B + 1.0), std::nan("")};
        for (int ia = 0; ia < na; ++ia) {
            if (!row[ia].error.empty()) break;
            if (sign(row[ia]) == 0) {
                s.A_empirical = row[ia].A;
                break;
            }
            if (ia > 0 && sign(row[ia - 1]) < 0 && sign(row[ia]) > 0) {
                const double l0 = row[ia - 1].lambda, l1 = row[ia].lambda;
                s.A_empirical = row[ia - 1].A + (row[ia].A - row[ia - 1].A) * l0 / (l0 - l1);
                break;
            }
        }
        const bool inside = s.A_analytic >= cfg.A_min && s.A_analytic <= cfg.A_max;
        if (s.A_empirical) {
            s.distance_cells = out.dA > 0.0 ? std::abs(*s.A_empirical - s.A_analytic) / out.dA : 0.0;
        } else if (inside) {
            s.distance_cells = std::numeric_limits<double>::infinity();
        }
        if (!std::isnan(s.distance_cells)) out.max_distance_cells = std::max(out.max_distance_cells, s.distance_cells);
        out.boundary.push_back(s);
    }
    return out;
}

json run_task(const RunConfig& cfg, const std::string& out_dir) {
    const fs::path dir(out_dir);
    switch (cfg.task) {
        case Task::eigen: return run_eigen(cfg, dir);
        case Task::wave: return run_wave(cfg, dir);
        case Task::simulate: return run_simulate(cfg, dir);
        case Task::sweep: return run_sweep(cfg, dir);
    }
    return nullptr;
}

json error_json(const std::exception& e) {
    json err = {{"message", e.what()}};
    if (const auto* c = dynamic_cast<const ConfigError*>(&e)) {
        err["kind"] = c->kind();
        if (!c->key().empty()) err["key"] = c->key();
    } else if (dynamic_cast<const ClassificationError*>(&e)) {
        err["kind"] = "classification";
    } else if (const auto* s = dynamic_cast<const SolverError*>(&e)) {
        err["kind"] = "solver";
        err["dump_size"] = s->dump().size();
    } else if (dynamic_cast<const ParameterError*>(&e)) {
        err["kind"] = "parameter";
    } else if (dynamic_cast<const GridError*>(&e)) {
        err["kind"] = "grid";
    } else if (dynamic_cast<const RangeError*>(&e)) {
        err["kind"] = "range";
    } else {
        err["kind"] = "internal";
    }
    return {{"status", "error"}, {"error", err}};
}

int exit_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const Error*>(&e)) return 3;
    return 1;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Travelling waves and extinction in a population structured by space and trait"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::string config_path, out_dir;
    for (const char* name : {"eigen", "wave", "simulate", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " task");
        sub->add_option("--config", config_path, "JSON configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const std::string task = app.get_subcommands().front()->get_name();

    const auto started = std::chrono::steady_clock::now();
    const std::string started_utc = utc_now();
    auto fail = [&](const std::exception& e) {
        json j = error_json(e);
        j["task"] = task;
        if (!out_dir.empty()) {
            std::error_code ec;
            fs::create_directories(out_dir, ec);
            std::ofstream f(fs::path(out_dir) / "error.json");
            if (f) f << j.dump(2) << '\n';
        }
        std::cout << j.dump(2) << std::endl;
        std::cerr << "clinewave " << task << ": " << e.what() << std::endl;
        return exit_code(e);
    };
    try {
        RunConfig cfg = load_config(config_path, parse_task(task));
        if (out_dir.empty()) out_dir = cfg.output_dir;
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec || !fs::is_directory(out_dir))
            throw ConfigError("config: output directory " + out_dir + " cannot be created", "validation", "output");
        json result = run_task(cfg, out_dir);
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        json summary = {{"status", "ok"}, {"task", task}, {"seed", cfg.seed}, {"config", cfg.raw}, {"result", result}};
        summary["metadata"] = {{"version", kVersion}, {"started_utc", started_utc}, {"elapsed_s", elapsed}};
        if (cfg.task == Task::sweep) summary["metadata"]["workers"] = worker_count();
        std::ofstream f = open_out(fs::path(out_dir) / "summary.json");
        f << summary.dump(2) << '\n';
        std::cout << summary.dump(2) << std::endl;
        return 0;
    } catch (const std::exception& e) {
        return fail(e);
    }
}

}  // namespace clinewave
