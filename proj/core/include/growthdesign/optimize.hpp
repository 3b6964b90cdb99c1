#pragma once

#include "growthdesign/equivalence.hpp"
#include "growthdesign/information.hpp"

#include <cstdint>

namespace growthdesign {

// One locally D-optimal design problem on the grid t_j = j - 1.
struct DesignProblem {
    int time_points = 1;
    GrowthCurve model;
    CovarianceSpec spec;
    double total_items = 1.0;

    [[nodiscard]] int parameters() const noexcept { return model.parameters(); }
    [[nodiscard]] CriterionEvaluator evaluator() const;
};

// Throws InvalidModel / Parameter errors for malformed problems.
void validate(const DesignProblem& problem);

struct SolverOptions {
    int max_iters = 2000;
    double gap_tol = kDefaultGapTolerance;
    int restarts = 8;
    std::uint64_t seed = 20240101;
};

void validate(const SolverOptions& opts);

struct SolveResult {
    DesignWeights design;
    OptimalityCertificate certificate;
    double criterion = 0.0;
    bool converged = false;
    int iterations = 0;  // summed over all starts
    int best_start = 0;  // 0 is the uniform start
};

/**
 * Maximizes log det M over the simplex.
 *
 * Each start runs vertex-direction steps w <- (1 - l) w + l e_j towards the
 * time point with the largest I psi_j (golden-section line search on l),
 * then polishes on the current support face: Newton steps on the face,
 * projected-gradient steps when the Newton direction is unusable, points
 * dropped when a step drives their weight to zero and re-admitted by a
 * vertex step when their I psi_j exceeds the weighted mean. Starts are the
 * uniform design plus `restarts` Dirichlet(1) draws; the best criterion wins.
 *
 * Throws Error(Infeasible) when the Jacobian has rank below p. A result with
 * converged == false still carries its certificate.
 */
[[nodiscard]] SolveResult solve_numeric(const DesignProblem& problem,
                                        const SolverOptions& opts = {});

// Ratio model on J = 2: w_2 = (a + 1) / (a + a rho) when a rho > 1, else (0, 1).
[[nodiscard]] DesignWeights solve_ratio_closed_form(double a, double rho,
                                                    double total_items = 1.0);

struct CubicRoot {
    double weight = 0.0;
    // Sign changes seen on a fine scan of (0, 1/2]; 1 in the regular case.
    int sign_changes = 0;
    [[nodiscard]] bool unique() const noexcept { return sign_changes <= 1; }
};

// w_1 of the symmetric optimum (w, 1 - 2w, w) for the straight line, J = 3, rho = 0.
[[nodiscard]] CubicRoot solve_line_j3_rho0(double a);

// w_1 of the symmetric optimum for J = p = 3 under AR(1).
[[nodiscard]] CubicRoot solve_line_j3_ar1(double a, double rho);

struct OracleResult {
    DesignWeights design;
    double criterion = 0.0;
    long long evaluated = 0;
};

// Largest number of lattice points brute_force_oracle will visit by default.
inline constexpr long long kDefaultOracleBudget = 50'000'000;

// Exhaustive lattice search over the simplex with the given step, restricted to
// supports of at most max_support points. Throws Error(Resource) when the
// lattice exceeds the budget.
[[nodiscard]] OracleResult brute_force_oracle(const DesignProblem& problem, double step,
                                              int max_support,
                                              long long budget = kDefaultOracleBudget);

/// Rounds an approximate design to integer counts summing to `total_items`.
///
/// J = p under compound symmetry with a uniform design yields the balanced
/// split (the first I mod J points get one extra item). Otherwise the
/// largest-remainder allocation (each support point at least one item) is
/// improved by single-item moves while the exact criterion increases.
[[nodiscard]] ExactDesignLayout round_exact(const DesignWeights& design, int total_items,
                                            const DesignProblem& problem);

}  // namespace growthdesign
