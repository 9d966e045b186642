#include "clinewave/config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "clinewave/error.hpp"

namespace clinewave {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& key, const std::string& msg) {
    throw ConfigError("config: " + key + ": " + msg, "validation", key);
}

// Read access to one JSON object with dotted key paths in errors.
class Section {
public:
    Section(const json* j, std::string path) : j_(j), path_(std::move(path)) {
        if (j_ && !j_->is_object()) invalid(path_, "expected an object");
    }

    bool present() const noexcept { return j_ != nullptr; }
    bool has(const std::string& k) const { return j_ && j_->contains(k); }
    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    void allow(std::initializer_list<const char*> keys) const {
        if (!j_) return;
        for (auto it = j_->begin(); it != j_->end(); ++it) {
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
                invalid(key(it.key()), "unknown key");
        }
    }

    const json& at(const std::string& k) const {
        if (!has(k)) invalid(key(k), "missing");
        return (*j_)[k];
    }

    Section child(const std::string& k, bool required = false) const {
        if (!has(k)) {
            if (required) invalid(key(k), "missing section");
            return Section(nullptr, key(k));
        }
        return Section(&(*j_)[k], key(k));
    }

    std::optional<double> opt_number(const std::string& k) const {
        if (!has(k) || (*j_)[k].is_null()) return std::nullopt;
        const json& v = (*j_)[k];
        if (!v.is_number()) invalid(key(k), "expected a number");
        return v.get<double>();
    }
    double number(const std::string& k) const {
        if (!has(k)) invalid(key(k), "missing");
        return *opt_number(k);
    }
    double number(const std::string& k, double def) const { return opt_number(k).value_or(def); }
    double positive(const std::string& k, double def) const {
        const double v = number(k, def);
        if (!(v > 0.0)) invalid(key(k), "must be positive");
        return v;
    }

    std::optional<int> opt_integer(const std::string& k) const {
        if (!has(k) || (*j_)[k].is_null()) return std::nullopt;
        const json& v = (*j_)[k];
        if (!v.is_number_integer()) invalid(key(k), "expected an integer");
        return v.get<int>();
    }
    int integer(const std::string& k, int def) const { return opt_integer(k).value_or(def); }

    bool flag(const std::string& k, bool def) const {
        if (!has(k)) return def;
        if (!(*j_)[k].is_boolean()) invalid(key(k), "expected true or false");
        return (*j_)[k].get<bool>();
    }

    std::string text(const std::string& k, const std::string& def, std::initializer_list<const char*> allowed) const {
        if (!has(k)) return def;
        const json& v = (*j_)[k];
        if (!v.is_string()) invalid(key(k), "expected a string");
        const std::string s = v.get<std::string>();
        if (allowed.size() && std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return s == a; })) {
            std::string list;
            for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
            invalid(key(k), "'" + s + "' is not one of " + list);
        }
        return s;
    }

    std::vector<double> numbers(const std::string& k) const {
        const json& v = at(k);
        if (!v.is_array()) invalid(key(k), "expected an array of numbers");
        std::vector<double> out;
        for (const json& e : v) {
            if (!e.is_number()) invalid(key(k), "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

private:
    const json* j_;
    std::string path_;
};

GrowthProfile growth_from(const Section& s) {
    s.allow({"type", "rmax", "A", "delta", "z", "r"});
    const std::string type = s.text("type", "quadratic", {"quadratic", "tabulated"});
    try {
        if (type == "quadratic") {
            const double rmax = s.number("rmax", 1.0);
            const double A = s.number("A");
            if (const auto d = s.opt_number("delta")) return GrowthProfile::quadratic(rmax, A, *d);
            return GrowthProfile::quadratic(rmax, A);
        }
        return GrowthProfile::tabulated(s.numbers("z"), s.numbers("r"), s.number("delta"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        invalid(s.key("type"), e.what());
    }
}

Kernel kernel_from(const Section& s) {
    if (!s.present()) return Kernel::constant(1.0);
    s.allow({"type", "value", "base", "amplitude", "width"});
    const std::string type = s.text("type", "constant", {"constant", "gaussian"});
    try {
        if (type == "constant") return Kernel::constant(s.number("value", 1.0));
        return Kernel::gaussian(s.number("base"), s.number("amplitude"), s.number("width"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        invalid(s.key("type"), e.what());
    }
}

ModelParams model_from(const Section& m) {
    m.allow({"growth", "kernel", "B", "bio"});
    if (m.has("bio")) {
        if (m.has("growth") || m.has("kernel") || m.has("B"))
            invalid(m.key("bio"), "use either bio or growth/kernel/B");
        const Section b = m.child("bio", true);
        b.allow({"sigma_x", "sigma_m", "r_max", "V_s", "b_cline", "K_cap"});
        BioParams bio{b.number("sigma_x"), b.number("sigma_m"), b.number("r_max"),
                      b.number("V_s"),     b.number("b_cline"), b.number("K_cap")};
        try {
            return rescale_bio(bio).params;
        } catch (const Error& e) {
            invalid(m.key("bio"), e.what());
        }
    }
    GrowthProfile growth = growth_from(m.child("growth", true));
    Kernel kernel = kernel_from(m.child("kernel"));
    const double B = m.number("B");
    try {
        ModelParams p(std::move(growth), std::move(kernel), B);
        const ValidationReport rep = validate_assumptions(p);
        if (!rep.ok()) {
            std::string msg = "assumptions fail:";
            for (const std::string& f : rep.failures()) msg += " " + f + ";";
            invalid(m.key("growth"), msg);
        }
        return p;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        invalid(m.key("B"), e.what());
    }
}

LineSolveOptions line_from(const Section& s, LineSolveOptions o) {
    o.tol = s.positive("tol", o.tol);
    o.h = s.positive("h", o.h);
    o.b0 = s.positive("b0", o.b0);
    o.b_cap = s.positive("b_cap", o.b_cap);
    o.tail_tol = s.positive("tail_tol", o.tail_tol);
    return o;
}

HomotopyConfig homotopy_from(const Section& w) {
    HomotopyConfig h;
    h.gamma = w.positive("gamma", h.gamma);
    if (const auto e = w.opt_number("epsilon")) {
        if (!(*e > 0.0)) invalid(w.key("epsilon"), "must be positive");
        h.epsilon = *e;
    }
    h.newton_tol = w.positive("newton_tol", h.newton_tol);
    h.newton_max_iter = w.integer("newton_max_iter", h.newton_max_iter);
    h.bisection_tol = w.positive("bisection_tol", h.bisection_tol);
    h.diagnostics = w.flag("diagnostics", h.diagnostics);
    const Section t = w.child("tau");
    t.allow({"step", "min_step", "max_step"});
    h.tau_step = t.positive("step", h.tau_step);
    h.min_tau_step = t.positive("min_step", h.min_tau_step);
    h.max_tau_step = t.positive("max_step", h.max_tau_step);
    if (h.min_tau_step > h.tau_step || h.tau_step > h.max_tau_step)
        invalid(t.key("step"), "need min_step <= step <= max_step");
    return h;
}

void read_eigen(const Section& s, EigenTaskConfig& c) {
    s.allow({"tol", "h", "b0", "b_cap", "tail_tol", "classify_h", "marginal_tol", "profile_csv"});
    c.line = line_from(s, c.line);
    c.classify.line.h = s.positive("classify_h", c.classify.line.h);
    c.classify.marginal_tol = s.positive("marginal_tol", c.classify.marginal_tol);
    c.profile_csv = s.flag("profile_csv", c.profile_csv);
}

void read_wave(const Section& s, WaveTaskConfig& c) {
    s.allow({"mode", "ladder", "rungs", "c_tol", "u_tol", "a", "b", "n_x", "n_z", "h", "c", "c_factor", "epsilon",
             "gamma", "tau", "newton_tol", "newton_max_iter", "bisection_tol", "diagnostics", "damping", "tol",
             "max_iter", "eps", "A", "sandwich_tol", "dump"});
    c.mode = s.text("mode", "minimal", {"minimal", "fast"}) == "fast" ? WaveTaskConfig::Mode::fast
                                                                       : WaveTaskConfig::Mode::minimal;
    c.ladder = s.flag("ladder", c.ladder);
    c.h = s.positive("h", c.h);
    c.a = s.positive("a", c.a);
    c.b = s.positive("b", c.b);
    c.n_x = s.opt_integer("n_x");
    c.n_z = s.opt_integer("n_z");
    for (const char* k : {"n_x", "n_z"}) {
        const auto n = s.opt_integer(k);
        if (n && (*n < 3 || *n % 2 == 0)) invalid(s.key(k), "must be odd and at least 3");
    }
    if (s.has("rungs")) {
        const json& r = s.at("rungs");
        if (!r.is_array() || r.empty()) invalid(s.key("rungs"), "expected a nonempty array of {a, b}");
        c.strip.rungs.clear();
        for (std::size_t k = 0; k < r.size(); ++k) {
            const Section e(&r[k], s.key("rungs") + "[" + std::to_string(k) + "]");
            e.allow({"a", "b"});
            c.strip.rungs.push_back({e.positive("a", 0.0), e.positive("b", 0.0)});
        }
    }
    c.strip.h = c.h;
    c.strip.c_tol = s.positive("c_tol", c.strip.c_tol);
    c.strip.u_tol = s.positive("u_tol", c.strip.u_tol);
    c.homotopy = homotopy_from(s);
    c.strip.homotopy = c.homotopy;
    if (const auto v = s.opt_number("c")) {
        if (!(*v > 0.0)) invalid(s.key("c"), "must be positive");
        c.c = *v;
    }
    c.c_factor = s.positive("c_factor", c.c_factor);
    c.fast.damping = s.positive("damping", c.fast.damping);
    if (c.fast.damping > 1.0) invalid(s.key("damping"), "must lie in (0, 1]");
    c.fast.tol = s.positive("tol", c.fast.tol);
    c.fast.max_iter = s.integer("max_iter", c.fast.max_iter);
    if (const auto v = s.opt_number("eps")) c.fast.eps = *v;
    if (const auto v = s.opt_number("A")) c.fast.A = *v;
    c.fast.sandwich_tol = s.positive("sandwich_tol", c.fast.sandwich_tol);
    c.dump = s.text("dump", c.dump, {"csv", "binary", "none"});
}

void read_simulate(const Section& s, SimulateTaskConfig& c) {
    s.allow({"regime", "T", "dt", "h", "a", "theta", "output_interval", "initial", "stencil", "dump_interval"});
    c.regime = s.text("regime", c.regime, {"auto", "invasion", "extinction"});
    c.T = s.positive("T", c.T);
    c.dt = s.positive("dt", c.dt);
    c.h = s.positive("h", c.h);
    if (const auto a = s.opt_number("a")) {
        if (!(*a > 0.0)) invalid(s.key("a"), "must be positive");
        c.a = *a;
    }
    c.theta = s.positive("theta", c.theta);
    c.output_interval = s.positive("output_interval", c.output_interval);
    const Section init = s.child("initial");
    init.allow({"type", "amplitude", "plateau_length"});
    c.initial = init.text("type", c.initial, {"default", "zero"});
    if (const auto v = init.opt_number("amplitude")) {
        if (*v < 0.0) invalid(init.key("amplitude"), "must be nonnegative");
        c.amplitude = *v;
    }
    c.plateau_length = init.positive("plateau_length", c.plateau_length);
    c.stencil = s.text("stencil", "monotone", {"monotone", "four_point"}) == "monotone" ? CrossStencil::monotone
                                                                                        : CrossStencil::four_point;
    c.dump_interval = s.number("dump_interval", c.dump_interval);
    if (c.dump_interval < 0.0) invalid(s.key("dump_interval"), "must be nonnegative");
}

void read_sweep(const Section& s, SweepTaskConfig& c) {
    s.allow({"A", "B", "classify_h", "marginal_tol"});
    for (const char* axis : {"A", "B"}) {
        const Section r = s.child(axis);
        r.allow({"min", "max", "n"});
        double& lo = axis[0] == 'A' ? c.A_min : c.B_min;
        double& hi = axis[0] == 'A' ? c.A_max : c.B_max;
        int& n = axis[0] == 'A' ? c.A_n : c.B_n;
        lo = r.number("min", lo);
        hi = r.number("max", hi);
        n = r.integer("n", n);
        if (n < 1) invalid(r.key("n"), "must be at least 1");
        if (hi < lo || (n > 1 && hi == lo)) invalid(r.key("max"), "must exceed min");
    }
    if (c.A_min <= 0.0) invalid(s.key("A.min"), "selection strength must be positive");
    if (c.B_min < 0.0) invalid(s.key("B.min"), "must be nonnegative");
    c.classify.line.h = s.positive("classify_h", c.classify.line.h);
    c.classify.marginal_tol = s.positive("marginal_tol", c.classify.marginal_tol);
}

}  // namespace

const char* task_name(Task t) {
    switch (t) {
        case Task::eigen: return "eigen";
        case Task::wave: return "wave";
        case Task::simulate: return "simulate";
        case Task::sweep: return "sweep";
    }
    return "?";
}

Task parse_task(const std::string& name) {
    for (Task t : {Task::eigen, Task::wave, Task::simulate, Task::sweep})
        if (name == task_name(t)) return t;
    invalid("task", "'" + name + "' is not one of eigen, wave, simulate, sweep");
}

ModelParams model_from_json(const json& j, const std::string& where) { return model_from(Section(&j, where)); }

RunConfig parse_config(const std::string& text, std::optional<Task> task) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
        std::ostringstream os;
        os << "config: parse error at line " << line << ": " << e.what();
        throw ConfigError(os.str(), "parse", "line " + std::to_string(line));
    }
    const Section root(&j, "");
    root.allow({"task", "model", "seed", "output", "eigen", "wave", "simulate", "sweep"});

    std::optional<Task> named;
    if (root.has("task")) {
        if (!j["task"].is_string()) invalid("task", "expected a string");
        named = parse_task(j["task"].get<std::string>());
    }
    if (task && named && *task != *named)
        invalid("task", std::string("file names task '") + task_name(*named) + "' but '" + task_name(*task) +
                            "' was requested");
    if (!task && !named) invalid("task", "missing");

    RunConfig cfg{task ? *task : *named, std::nullopt, 0, "out", {}, {}, {}, {}, j};
    cfg.model = model_from(root.child("model", true));
    if (root.has("seed")) {
        if (!j["seed"].is_number_unsigned()) invalid("seed", "expected a nonnegative integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    cfg.output_dir = root.text("output", cfg.output_dir, {});

    switch (cfg.task) {
        case Task::eigen: read_eigen(root.child("eigen"), cfg.eigen); break;
        case Task::wave: read_wave(root.child("wave"), cfg.wave); break;
        case Task::simulate: read_simulate(root.child("simulate"), cfg.simulate); break;
        case Task::sweep:
            read_sweep(root.child("sweep"), cfg.sweep);
            if (!cfg.model->growth.as_quadratic())
                invalid("model.growth.type", "the sweep varies A and needs a quadratic profile");
            break;
    }
    return cfg;
}

RunConfig load_config(const std::string& path, std::optional<Task> task) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path, "parse", "");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), task);
}

}  // namespace clinewave
