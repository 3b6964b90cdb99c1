#pragma once

#include "growthdesign/optimize.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace growthdesign {

inline constexpr int kConfigVersion = 1;

enum class RunMode { Solve, Certify, Efficiency, Sweep, FigureData };

[[nodiscard]] std::string_view to_string(RunMode mode) noexcept;
[[nodiscard]] std::optional<RunMode> parse_run_mode(std::string_view name);

// What a candidate design is compared against in efficiency mode.
enum class ReferenceKind { Optimal, ClosedForm, Weights };

// One growth-curve family with a list of values per beta component.
struct ModelAxis {
    CurveFamily family = CurveFamily::StraightLine;
    std::vector<std::vector<double>> beta_axes;

    bool operator==(const ModelAxis&) const = default;
};

struct SweepAxes {
    std::vector<ModelAxis> models;
    std::vector<CovarianceKind> kinds;
    // Exactly one of these drives the random-effect variance.
    std::vector<double> sigma_gamma_sq;
    std::vector<double> standardized_ratio;  // a = I sigma_gamma^2 / sigma_eps^2
    std::vector<double> rho;
};

/**
 * A run description. `problem` carries J, I and sigma_eps^2 for every mode;
 * its model and covariance are used by the single-problem modes, while
 * sweep and figure-data expand `sweep` into a grid of problems.
 */
struct ScenarioConfig {
    int version = kConfigVersion;
    RunMode mode = RunMode::Solve;
    DesignProblem problem;
    std::optional<VectorXd> design;
    ReferenceKind reference_kind = ReferenceKind::Optimal;
    std::optional<VectorXd> reference;
    SweepAxes sweep;
    SolverOptions solver;
    std::string out_dir = "out";
    std::string figure_kind;
    int jobs = 0;  // 0 = hardware concurrency
};

// Parses the YAML config format. Throws Error(Schema) naming the offending
// field path, e.g. "problem.model.beta[2]".
[[nodiscard]] ScenarioConfig parse_config(std::string_view text);
[[nodiscard]] ScenarioConfig load_config(const std::filesystem::path& path);

// Cross-field checks (mode-specific sections present, values admissible).
void validate(const ScenarioConfig& config);

// Built-in presets; currently only "paper-table1".
[[nodiscard]] std::optional<ScenarioConfig> preset(std::string_view name);

// J = 7, I = 100, sigma_eps^2 = 1, exponential and logistic growth curves,
// both covariance kinds, beta_0 = 0, beta_1 in {1, 3, 5, 10}, beta_2 in
// {0.5, 1, 2}, beta_3 in {-2, ..., 2}, rho in {0, 0.05, ..., 0.95} and
// sigma_gamma^2 in {0, 0.1, ..., 2, 2.5, 5, 10}.
[[nodiscard]] ScenarioConfig table1_preset();

}  // namespace growthdesign
