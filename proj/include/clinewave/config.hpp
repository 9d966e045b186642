#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clinewave/eigen.hpp"
#include "clinewave/model.hpp"
#include "clinewave/simulate.hpp"
#include "clinewave/waves.hpp"

namespace clinewave {

enum class Task { eigen, wave, simulate, sweep };

const char* task_name(Task t);
/// Throws ConfigError (validation, key "task") for unknown names.
Task parse_task(const std::string& name);

struct EigenTaskConfig {
    LineSolveOptions line{};
    ClassifyOptions classify{};
    bool profile_csv = true;
};

struct WaveTaskConfig {
    enum class Mode { minimal, fast };
    Mode mode = Mode::minimal;
    /// minimal mode: strip ladder, or a single box when false
    bool ladder = true;
    StripConfig strip{};
    /// single box (minimal without ladder, and fast mode)
    double a = 30.0;
    double b = 8.0;
    std::optional<int> n_x;
    std::optional<int> n_z;
    double h = 0.2;
    /// fast mode: c itself, or c_factor * c*
    std::optional<double> c;
    double c_factor = 1.2;
    FastWaveConfig fast{};
    HomotopyConfig homotopy{};
    std::string dump = "csv";  ///< csv, binary or none
};

struct SimulateTaskConfig {
    std::string regime = "auto";  ///< auto, invasion or extinction
    double T = 60.0;
    double dt = 0.05;
    double h = 0.2;
    std::optional<double> a;
    double theta = 0.05;
    double output_interval = 0.5;
    std::string initial = "default";  ///< default or zero
    std::optional<double> amplitude;
    double plateau_length = 10.0;
    CrossStencil stencil = CrossStencil::monotone;
    double dump_interval = 0.0;  ///< grid dumps every this many time units; 0 disables
};

struct SweepTaskConfig {
    double A_min = 0.1;
    double A_max = 2.0;
    int A_n = 20;
    double B_min = 0.0;
    double B_max = 3.0;
    int B_n = 20;
    ClassifyOptions classify{};
};

struct RunConfig {
    Task task;
    std::optional<ModelParams> model;
    std::uint64_t seed = 0;
    std::string output_dir;
    EigenTaskConfig eigen;
    WaveTaskConfig wave;
    SimulateTaskConfig simulate;
    SweepTaskConfig sweep;
    nlohmann::json raw;
};

/// Builds ModelParams from a `model` section; `where` prefixes key names in
/// error messages.
ModelParams model_from_json(const nlohmann::json& j, const std::string& where = "model");

/// Parses and validates a configuration. `task` is the subcommand; when the
/// file names a task it must agree. Throws ConfigError.
RunConfig parse_config(const std::string& text, std::optional<Task> task = std::nullopt);
RunConfig load_config(const std::string& path, std::optional<Task> task = std::nullopt);

}  // namespace clinewave
