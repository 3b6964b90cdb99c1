#pragma once

#include "growthdesign/information.hpp"

#include <vector>

namespace growthdesign {

// Default tolerance on the gap, in units of I psi.
inline constexpr double kDefaultGapTolerance = 1e-8;
// Weights above this count as support points for the equality clause.
inline constexpr double kSupportThreshold = 1e-10;

/**
 * First-order optimality evidence for an approximate design.
 *
 * `scaled_psi` holds I psi_j. A design is locally D-optimal exactly when no
 * I psi_j exceeds the weighted mean sum_l w_l I psi_l, with equality on the
 * support. The directional derivative of log det M towards the one-point
 * design at t_j is sigma_eps^2 (I psi_j - mean), which is why the bound
 * carries `derivative_scale`.
 */
struct OptimalityCertificate {
    VectorXd psi;
    VectorXd scaled_psi;
    double avg = 0.0;
    double gap = 0.0;
    bool optimal = false;
    double eff_lower_bound = 0.0;
    double tol = kDefaultGapTolerance;
    double derivative_scale = 1.0;
    // Support points whose I psi_j differs from the mean by more than tol.
    std::vector<int> equality_violations;
};

// Diagonal of (s2 I + Sigma M0)^{-1} A M^{-1} A^T (s2 I + M0 Sigma)^{-1}.
// Throws Error(Certificate) when beta is not estimable under the design.
[[nodiscard]] VectorXd psi_vector(const DesignWeights& design, const GrowthCurve& model,
                                  const CovarianceSpec& spec);

[[nodiscard]] OptimalityCertificate check_optimality(const DesignWeights& design,
                                                     const GrowthCurve& model,
                                                     const CovarianceSpec& spec,
                                                     double tol = kDefaultGapTolerance);

// Same check against a prepared evaluator; used by the solver.
[[nodiscard]] OptimalityCertificate certify(const CriterionEvaluator& eval,
                                            const VectorXd& weights,
                                            double tol = kDefaultGapTolerance);

// exp(-derivative_scale * gap / p), clamped to (0, 1]. By concavity this never
// exceeds the D-efficiency of the certified design.
[[nodiscard]] double efficiency_lower_bound(const OptimalityCertificate& cert, int p);

}  // namespace growthdesign
