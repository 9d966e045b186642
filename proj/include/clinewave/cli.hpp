#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "clinewave/config.hpp"

namespace clinewave {

struct SweepRow {
    double A;
    double B;
    double lambda;  ///< NaN when the point failed
    std::string classification;
    std::optional<double> c_star;
    std::string error;  ///< empty unless the point failed
};

/// Empirical extinction boundary along one B row of the lattice.
struct BoundarySample {
    double B;
    std::optional<double> A_empirical;  ///< zero of lambda, linear between lattice points
    double A_analytic;                  ///< rmax^2 / (B^2 + 1)
    double distance_cells;              ///< |A_empirical - A_analytic| / lattice step
};

struct SweepResult {
    std::vector<SweepRow> rows;  ///< B-major, A increasing within a row
    std::vector<BoundarySample> boundary;
    double dA;
    double max_distance_cells;
    int mismatches;  ///< classifications disagreeing with the analytic criterion
    int failures;
};

/// Worker count from CLINEWAVE_WORKERS, else the hardware concurrency.
int worker_count();

/// Classifies every lattice point of a quadratic template in parallel.
SweepResult sweep(const ModelParams& tmpl, const SweepTaskConfig& cfg, int workers);

/// Runs one task and writes its artifacts under out_dir. Returns the
/// summary written to summary.json (without metadata).
nlohmann::json run_task(const RunConfig& cfg, const std::string& out_dir);

/// Machine-readable description of an exception.
nlohmann::json error_json(const std::exception& e);

/// Exit status for an exception: 2 configuration, 3 model or solver, 1 other.
int exit_code(const std::exception& e);

/// Entry point of the clinewave tool.
int cli_main(int argc, char** argv);

}  // namespace clinewave
