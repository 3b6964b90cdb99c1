#pragma once

#include "growthdesign/config.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace growthdesign {

// The problem a single cell was run on.
struct CellInputs {
    CurveFamily family = CurveFamily::StraightLine;
    std::vector<double> beta;
    CovarianceKind kind = CovarianceKind::CompoundSymmetry;
    double sigma_gamma_sq = 0.0;
    double rho = 0.0;
    double sigma_eps_sq = 1.0;
    int time_points = 1;
    double total_items = 1.0;

    [[nodiscard]] double standardized_ratio() const noexcept {
        return total_items * sigma_gamma_sq / sigma_eps_sq;
    }
    [[nodiscard]] DesignProblem problem() const;
    [[nodiscard]] static CellInputs from(const DesignProblem& problem);

    bool operator==(const CellInputs&) const = default;
};

/**
 * Result of one cell. `status` is "ok" or the error code name of the failure;
 * failed cells keep their inputs and message. `weights` and the certificate
 * fields describe the solved optimum in solve and sweep modes and the
 * supplied design in certify and efficiency modes, where `reference_weights`
 * holds the design it was compared against.
 */
struct CellRecord {
    std::size_t index = 0;
    CellInputs inputs;
    std::string status = "ok";
    std::string message;

    std::vector<double> weights;
    std::optional<std::vector<double>> reference_weights;
    double criterion = 0.0;  // log det M, -infinity when singular

    std::vector<double> psi;
    std::vector<double> scaled_psi;
    double avg = 0.0;
    double gap = 0.0;
    bool optimal = false;
    double eff_lower_bound = 0.0;
    std::vector<int> violations;

    bool converged = false;
    int iterations = 0;
    double uniform_efficiency = 0.0;
    std::optional<double> efficiency;
    double wall_ms = 0.0;

    [[nodiscard]] bool ok() const noexcept { return status == "ok"; }

    bool operator==(const CellRecord&) const = default;
};

// Aggregates over the cells sharing a family and/or covariance kind.
// An empty family or kind means "all".
struct GroupSummary {
    std::string family;
    std::string kind;
    std::size_t cells = 0;
    std::size_t failures = 0;
    std::size_t not_converged = 0;
    std::size_t not_optimal = 0;
    double min_uniform_efficiency = 0.0;
    double mean_uniform_efficiency = 0.0;

    bool operator==(const GroupSummary&) const = default;
};

struct RunSummary {
    std::vector<GroupSummary> groups;

    // Looks up a group; nullopt when no such group was formed.
    [[nodiscard]] std::optional<GroupSummary> find(std::string_view family,
                                                   std::string_view kind) const;

    bool operator==(const RunSummary&) const = default;
};

struct RunReport {
    int version = kConfigVersion;
    std::string mode;
    std::vector<CellRecord> cells;
    RunSummary summary;

    bool operator==(const RunReport&) const = default;
};

// Overall group first, then per family, per kind and per family x kind, in
// order of first appearance.
[[nodiscard]] RunSummary summarize(const std::vector<CellRecord>& cells);

// Non-finite numbers are written as null and read back as -infinity.
[[nodiscard]] std::string to_json(const RunReport& report);
[[nodiscard]] RunReport report_from_json(std::string_view text);
[[nodiscard]] std::string to_json(const RunSummary& summary);

// Shortest representation that parses back to the same double.
[[nodiscard]] std::string format_number(double value);

// A header plus rows of already formatted fields.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // RFC 4180: CRLF line ends, fields quoted when they contain a comma,
    // quote, CR or LF, embedded quotes doubled.
    [[nodiscard]] std::string to_csv() const;
};

// One row per cell; wall time is left out so that reruns are byte-identical.
// Weight columns w_1..w_J use the largest J in the report.
[[nodiscard]] Table cells_table(const RunReport& report);

[[nodiscard]] const std::vector<std::string_view>& figure_kinds();

/**
 * Plot-ready long-format tables, one row per (cell, time point) for the
 * weight figures and one row per cell for the efficiency figures.
 *
 *   weight-vs-rho      series,family,kind,beta,a,rho,time_index,weight
 *   weight-vs-a        series,family,kind,beta,rho,a,time_index,weight
 *   efficiency-vs-a    series,family,kind,beta,rho,a,uniform_efficiency
 *   efficiency-vs-rho  series,family,kind,beta,a,rho,uniform_efficiency
 *   weights-per-time   cell,family,kind,beta,a,rho,time_index,time,weight
 *
 * A series collects the cells that differ only in the x column. Series are
 * numbered by first appearance, rows are sorted by series then x then time
 * index. Failed cells are skipped. Throws Error(Usage) for an unknown kind.
 */
[[nodiscard]] Table emit_figure_data(const RunReport& report, std::string_view figure_kind);

}  // namespace growthdesign
