#pragma once

#include "growthdesign/report.hpp"

#include <filesystem>
#include <vector>

namespace growthdesign {

// Process exit codes of the command-line front end.
enum class ExitCode : int {
    Success = 0,
    Usage = 1,
    Infeasible = 2,
    NotConverged = 3,
};

/**
 * Runs a single-problem mode.
 *
 *   solve       optimum, its certificate and the uniform design's efficiency
 *   certify     certificate of config.design plus its efficiency against the
 *               solved optimum
 *   efficiency  efficiency of config.design against the reference design
 *               (solved optimum, closed form or listed weights)
 *
 * Problem failures end up in the single cell's status; schema problems throw.
 */
[[nodiscard]] RunReport run_scenario(const ScenarioConfig& config);

// Grid cells of a sweep in deterministic order: models, then beta values
// (last component fastest), covariance kinds, variance values, rho.
[[nodiscard]] std::vector<CellInputs> expand_grid(const ScenarioConfig& config);

// Solves one sweep cell; never throws for problem failures.
[[nodiscard]] CellRecord solve_cell(const CellInputs& inputs, const SolverOptions& opts,
                                    std::size_t index);

// Runs every grid cell on a pool of `jobs` workers (0 = hardware
// concurrency). Records come back in grid order.
[[nodiscard]] RunReport sweep(const ScenarioConfig& config, int jobs = 0);

// Closed-form optimum where one is known: Ratio on J = 2, Unstructured
// under compound symmetry (uniform), StraightLine J = 3 with rho = 0 and
// Unstructured J = 3 under AR(1). Throws Error(Usage) otherwise.
[[nodiscard]] DesignWeights closed_form_optimum(const DesignProblem& problem);

// Worst outcome over all cells: usage/model errors, then infeasible, then
// convergence or certificate failures.
[[nodiscard]] ExitCode exit_code(const RunReport& report);

// Writes report.json (single modes) or cells.csv + summary.json (sweep), and
// figure-<kind>.csv in figure-data mode. Creates the directory.
void write_outputs(const RunReport& report, const ScenarioConfig& config,
                   const std::filesystem::path& out_dir);

}  // namespace growthdesign
