#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string_view>
#include <vector>

namespace growthdesign {

using Eigen::MatrixXd;

enum class CovarianceKind {
    CompoundSymmetry,
    AR1,
};

[[nodiscard]] std::string_view to_string(CovarianceKind kind) noexcept;
[[nodiscard]] std::optional<CovarianceKind> parse_covariance_kind(std::string_view name);

// Random-effect covariance Sigma_gamma plus error variance.
struct CovarianceSpec {
    CovarianceKind kind = CovarianceKind::CompoundSymmetry;
    double sigma_gamma_sq = 0.0;
    double rho = 0.0;
    double sigma_eps_sq = 1.0;

    // tau^2 = sigma_gamma^2 / sigma_eps^2
    [[nodiscard]] double variance_ratio() const noexcept { return sigma_gamma_sq / sigma_eps_sq; }
    // a = I tau^2, the quantity through which budget and variances enter the optimal weights
    [[nodiscard]] double standardized_ratio(double total_items) const noexcept {
        return total_items * variance_ratio();
    }
};

// Throws Error(Parameter) unless sigma_eps_sq > 0, sigma_gamma_sq >= 0 and 0 <= rho <= 1.
void validate(const CovarianceSpec& spec);

// Builds the spec with sigma_gamma^2 chosen so that I tau^2 equals `a`.
[[nodiscard]] CovarianceSpec spec_for_ratio(CovarianceKind kind, double a, double rho,
                                            double total_items, double sigma_eps_sq = 1.0);

// Item counts per time point of an exact design.
struct ExactDesignLayout {
    std::vector<int> counts;

    [[nodiscard]] int total() const noexcept;
    [[nodiscard]] int size() const noexcept { return static_cast<int>(counts.size()); }
};

void validate(const ExactDesignLayout& layout);

// sigma_gamma^2 ((1 - rho) I + rho 1 1^T)
[[nodiscard]] MatrixXd sigma_cs(const CovarianceSpec& spec, int J);
// sigma_gamma^2 rho^|j - j'|
[[nodiscard]] MatrixXd sigma_ar1(const CovarianceSpec& spec, int J);
// Dispatches on spec.kind.
[[nodiscard]] MatrixXd sigma_gamma(const CovarianceSpec& spec, int J);

// Largest subject-level observation count accepted by build_full_v.
inline constexpr int kMaxFullCovarianceSize = 10000;

/// Dense per-subject covariance V = sigma_eps^2 I_I + F Sigma F^T with
/// F = blockdiag(1_{I_j}). Test oracle only; O(I^2) memory.
[[nodiscard]] MatrixXd build_full_v(const ExactDesignLayout& layout, const MatrixXd& sigma,
                                    double sigma_eps_sq);

// The I x J indicator matrix F mapping items to time points.
[[nodiscard]] MatrixXd item_incidence(const ExactDesignLayout& layout);

}  // namespace growthdesign
