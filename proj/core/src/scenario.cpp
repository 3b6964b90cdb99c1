#include "growthdesign/scenario.hpp"

#include "growthdesign/error.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <thread>

namespace growthdesign {

namespace {

std::vector<double> to_std(const VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

void fill_certificate(CellRecord& rec, const OptimalityCertificate& cert) {
    rec.psi = to_std(cert.psi);
    rec.scaled_psi = to_std(cert.scaled_psi);
    rec.avg = cert.avg;
    rec.gap = cert.gap;
    rec.optimal = cert.optimal;
    rec.eff_lower_bound = cert.eff_lower_bound;
    rec.violations = cert.equality_violations;
}

void fail(CellRecord& rec, const Error& e) {
    rec.status = std::string(to_string(e.code()));
    rec.message = e.what();
}

double uniform_efficiency(const DesignProblem& problem, const DesignWeights& optimum) {
    const auto uniform = DesignWeights::uniform(problem.time_points, problem.total_items);
    return d_efficiency(uniform, optimum, problem.model, problem.spec);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    const auto d = std::chrono::steady_clock::now() - start;
    return std::chrono::duration<double, std::milli>(d).count();
}

// Candidate design from the config, renormalized onto the simplex.
DesignWeights supplied_design(const VectorXd& values, const DesignProblem& problem) {
    return DesignWeights::normalized(values, problem.total_items);
}

CellRecord compare_design(const ScenarioConfig& config) {
    const DesignProblem& problem = config.problem;
    CellRecord rec;
    rec.inputs = CellInputs::from(problem);
    const auto start = std::chrono::steady_clock::now();
    try {
        const auto candidate = supplied_design(*config.design, problem);
        rec.weights = to_std(candidate.weights());
        rec.criterion = log_det_criterion(candidate, problem.model, problem.spec);

        std::optional<DesignWeights> reference;
        if (config.mode == RunMode::Efficiency && config.reference_kind == ReferenceKind::Weights) {
            reference = supplied_design(*config.reference, problem);
            rec.converged = true;
        } else if (config.mode == RunMode::Efficiency &&
                   config.reference_kind == ReferenceKind::ClosedForm) {
            reference = closed_form_optimum(problem);
            rec.converged = true;
        } else {
            const auto solved = solve_numeric(problem, config.solver);
            reference = solved.design;
            rec.converged = solved.converged;
            rec.iterations = solved.iterations;
        }
        rec.reference_weights = to_std(reference->weights());
        rec.efficiency = d_efficiency(candidate, *reference, problem.model, problem.spec);
        rec.uniform_efficiency = uniform_efficiency(problem, *reference);
        fill_certificate(rec, check_optimality(candidate, problem.model, problem.spec,
                                               config.solver.gap_tol));
    } catch (const Error& e) {
        fail(rec, e);
    }
    rec.wall_ms = elapsed_ms(start);
    return rec;
}

std::vector<std::vector<double>> beta_product(const ModelAxis& axis) {
    std::vector<std::vector<double>> out{{}};
    for (const auto& values : axis.beta_axes) {
        std::vector<std::vector<double>> next;
        for (const auto& prefix : out) {
            for (double v : values) {
                auto row = prefix;
                row.push_back(v);
                next.push_back(std::move(row));
            }
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace

CellRecord solve_cell(const CellInputs& inputs, const SolverOptions& opts, std::size_t index) {
    CellRecord rec;
    rec.index = index;
    rec.inputs = inputs;
    const auto start = std::chrono::steady_clock::now();
    try {
        const DesignProblem problem = inputs.problem();
        const auto result = solve_numeric(problem, opts);
        rec.weights = to_std(result.design.weights());
        rec.criterion = result.criterion;
        fill_certificate(rec, result.certificate);
        rec.converged = result.converged;
        rec.iterations = result.iterations;
        rec.uniform_efficiency = uniform_efficiency(problem, result.design);
    } catch (const Error& e) {
        fail(rec, e);
    }
    rec.wall_ms = elapsed_ms(start);
    return rec;
}

DesignWeights closed_form_optimum(const DesignProblem& problem) {
    validate(problem);
    const int J = problem.time_points;
    const double I = problem.total_items;
    const double a = problem.spec.standardized_ratio(I);
    const double rho = problem.spec.rho;
    const auto family = problem.model.family;
    const bool cs = problem.spec.kind == CovarianceKind::CompoundSymmetry;

    if (family == CurveFamily::Ratio && J == 2) {
        return solve_ratio_closed_form(a, rho, I);
    }
    if (family == CurveFamily::Unstructured && cs) {
        return DesignWeights::uniform(J, I);
    }
    if (family == CurveFamily::StraightLine && J == 3 && (rho == 0.0 || problem.spec.sigma_gamma_sq == 0.0)) {
        const double w = solve_line_j3_rho0(a).weight;
        VectorXd weights(3);
        weights << w, 1.0 - 2.0 * w, w;
        return DesignWeights::normalized(weights, I);
    }
    if (family == CurveFamily::Unstructured && J == 3) {
        const double w = solve_line_j3_ar1(a, rho).weight;
        VectorXd weights(3);
        weights << w, 1.0 - 2.0 * w, w;
        return DesignWeights::normalized(weights, I);
    }
    throw Error(ErrorCode::Usage, "no closed-form optimum is known for this problem");
}

RunReport run_scenario(const ScenarioConfig& config) {
    validate(config);
    RunReport report;
    report.mode = std::string(to_string(config.mode));
    switch (config.mode) {
        case RunMode::Solve: {
            CellInputs inputs = CellInputs::from(config.problem);
            report.cells.push_back(solve_cell(inputs, config.solver, 0));
            break;
        }
        case RunMode::Certify:
        case RunMode::Efficiency:
            report.cells.push_back(compare_design(config));
            break;
        case RunMode::Sweep:
        case RunMode::FigureData:
            return sweep(config, config.jobs);
    }
    report.summary = summarize(report.cells);
    return report;
}

std::vector<CellInputs> expand_grid(const ScenarioConfig& config) {
    const auto& axes = config.sweep;
    const bool by_ratio = axes.sigma_gamma_sq.empty();
    const auto& variance = by_ratio ? axes.standardized_ratio : axes.sigma_gamma_sq;
    const double I = config.problem.total_items;
    const double s2 = config.problem.spec.sigma_eps_sq;

    std::vector<CellInputs> cells;
    for (const auto& model : axes.models) {
        for (const auto& beta : beta_product(model)) {
            for (const auto kind : axes.kinds) {
                for (const double v : variance) {
                    for (const double rho : axes.rho) {
                        CellInputs in;
                        in.family = model.family;
                        in.beta = beta;
                        in.kind = kind;
                        in.sigma_gamma_sq = by_ratio ? v * s2 / I : v;
                        in.rho = rho;
                        in.sigma_eps_sq = s2;
                        in.time_points = config.problem.time_points;
                        in.total_items = I;
                        cells.push_back(std::move(in));
                    }
                }
            }
        }
    }
    return cells;
}

RunReport sweep(const ScenarioConfig& config, int jobs) {
    validate(config);
    const auto cells = expand_grid(config);
    std::vector<CellRecord> records(cells.size());

    unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs) : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1U, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1)));

    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            records[i] = solve_cell(cells[i], config.solver, i);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned t = 0; t < workers; ++t) {
            pool.emplace_back(work);
        }
    }

    RunReport report;
    report.mode = std::string(to_string(config.mode));
    report.cells = std::move(records);
    report.summary = summarize(report.cells);
    return report;
}

ExitCode exit_code(const RunReport& report) {
    bool infeasible = false;
    bool not_converged = false;
    for (const auto& c : report.cells) {
        if (c.ok()) {
            not_converged = not_converged || !c.converged;
        } else if (c.status == to_string(ErrorCode::Infeasible)) {
            infeasible = true;
        } else if (c.status == to_string(ErrorCode::Certificate)) {
            not_converged = true;
        } else {
            return ExitCode::Usage;
        }
    }
    if (infeasible) return ExitCode::Infeasible;
    if (not_converged) return ExitCode::NotConverged;
    return ExitCode::Success;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::Usage, "cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw Error(ErrorCode::Usage, "failed writing " + path.string());
    }
}

}  // namespace

void write_outputs(const RunReport& report, const ScenarioConfig& config,
                   const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw Error(ErrorCode::Usage, "cannot create output directory " + out_dir.string());
    }
    write_file(out_dir / "cells.csv", cells_table(report).to_csv());
    const bool grid = config.mode == RunMode::Sweep || config.mode == RunMode::FigureData;
    if (grid) {
        write_file(out_dir / "summary.json", to_json(report.summary));
    } else {
        write_file(out_dir / "report.json", to_json(report));
    }
    if (config.mode == RunMode::FigureData) {
        const auto table = emit_figure_data(report, config.figure_kind);
        write_file(out_dir / ("figure-" + config.figure_kind + ".csv"), table.to_csv());
    }
}

}  // namespace growthdesign
