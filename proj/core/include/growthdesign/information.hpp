#pragma once

#include "growthdesign/covariance.hpp"
#include "growthdesign/model.hpp"

#include <Eigen/Dense>

namespace growthdesign {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Largest time grid handled by the dense J x J solves.
inline constexpr int kMaxTimePoints = 64;

// Determinants at or below this value are treated as singular.
inline constexpr double kSingularDeterminant = 1e-300;

/**
 * Approximate design: weights w_j >= 0 summing to one, together with the
 * item budget I. Item counts are I * w_j and need not be integers.
 */
class DesignWeights {
public:
    // Requires nonnegative weights summing to 1 within 1e-12 and I > 0.
    DesignWeights(VectorXd weights, double total_items);

    // Rescales nonnegative values with a positive sum onto the simplex.
    [[nodiscard]] static DesignWeights normalized(const VectorXd& raw, double total_items);
    [[nodiscard]] static DesignWeights uniform(int J, double total_items);
    [[nodiscard]] static DesignWeights from_counts(const ExactDesignLayout& layout);

    [[nodiscard]] const VectorXd& weights() const noexcept { return weights_; }
    [[nodiscard]] double weight(int j) const noexcept { return weights_[j]; }
    [[nodiscard]] double total_items() const noexcept { return total_items_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(weights_.size()); }
    [[nodiscard]] int support_size(double threshold = 0.0) const noexcept;
    [[nodiscard]] VectorXd counts() const { return total_items_ * weights_; }

private:
    VectorXd weights_;
    double total_items_;
};

struct InfoMatrix {
    MatrixXd m;
    double logdet = 0.0;
    bool singular = true;
};

/**
 * Evaluates the per-subject D-criterion of one design problem at many
 * weight vectors. The Jacobian, Sigma_gamma, error variance and budget are
 * fixed at construction.
 *
 * With M0 = diag(I w), S = M0^{1/2}, K = sigma_eps^2 I + S Sigma S and
 * Core = S K^{-1} S, the information is M = A^T Core A. The regularized
 * inverse (sigma_eps^2 I + Sigma M0)^{-1} equals (I - Sigma Core) / sigma_eps^2,
 * so every quantity stays finite when some weights vanish.
 */
class CriterionEvaluator {
public:
    CriterionEvaluator(MatrixXd jac, MatrixXd sigma, double sigma_eps_sq, double total_items);

    enum class Detail { Value, Gradient, Hessian };

    struct Point {
        double logdet = 0.0;
        bool singular = true;
        MatrixXd info;        // p x p
        VectorXd psi;         // diagonal sensitivity values
        VectorXd scaled_psi;  // I * psi
        VectorXd gradient;    // d logdet / d w_j = I sigma_eps^2 psi_j
        MatrixXd hessian;     // d^2 logdet / d w_j d w_k
    };

    [[nodiscard]] Point evaluate(const VectorXd& weights, Detail detail) const;

    // log det M, or -infinity when singular. Fast path without derivatives.
    [[nodiscard]] double log_det(const VectorXd& weights) const;

    [[nodiscard]] MatrixXd core(const VectorXd& weights) const;

    [[nodiscard]] const MatrixXd& jacobian() const noexcept { return jac_; }
    [[nodiscard]] const MatrixXd& sigma() const noexcept { return sigma_; }
    [[nodiscard]] double sigma_eps_sq() const noexcept { return sigma_eps_sq_; }
    [[nodiscard]] double total_items() const noexcept { return total_items_; }
    [[nodiscard]] int time_points() const noexcept { return static_cast<int>(jac_.rows()); }
    [[nodiscard]] int parameters() const noexcept { return static_cast<int>(jac_.cols()); }

private:
    MatrixXd jac_;
    MatrixXd sigma_;
    double sigma_eps_sq_;
    double total_items_;
};

// Builds the evaluator for a model and covariance on the grid of size J.
[[nodiscard]] CriterionEvaluator make_evaluator(const GrowthCurve& model,
                                                const CovarianceSpec& spec, int J,
                                                double total_items);

// M0^{1/2} (sigma_eps^2 I + M0^{1/2} Sigma M0^{1/2})^{-1} M0^{1/2}, M0 = diag(I w).
[[nodiscard]] MatrixXd core_info(const DesignWeights& design, const MatrixXd& sigma,
                                 double sigma_eps_sq);

// Per-subject Fisher information A^T core_info A.
[[nodiscard]] InfoMatrix fisher_info(const DesignWeights& design, const GrowthCurve& model,
                                     const CovarianceSpec& spec);

// log det of fisher_info; -infinity for singular designs.
[[nodiscard]] double log_det_criterion(const DesignWeights& design, const GrowthCurve& model,
                                       const CovarianceSpec& spec);

// (det M(candidate) / det M(reference))^{1/p}. Throws Error(Parameter) for a
// singular reference; a singular candidate has efficiency 0.
[[nodiscard]] double d_efficiency(const DesignWeights& candidate, const DesignWeights& reference,
                                  const GrowthCurve& model, const CovarianceSpec& spec);

}  // namespace growthdesign
