#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>

namespace growthdesign {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Equidistant testing occasions t_j = j - 1, j = 1..J.
class TimeGrid {
public:
    explicit TimeGrid(int count);

    [[nodiscard]] int size() const noexcept { return count_; }
    [[nodiscard]] double time(int j) const noexcept { return static_cast<double>(j); }
    [[nodiscard]] VectorXd times() const;

private:
    int count_;
};

enum class CurveFamily {
    Unstructured,
    Ratio,
    StraightLine,
    Exponential,
    Logistic,
};

[[nodiscard]] std::string_view to_string(CurveFamily family) noexcept;
[[nodiscard]] std::optional<CurveFamily> parse_curve_family(std::string_view name);

// Number of mean parameters; Unstructured has one per time point.
[[nodiscard]] int parameter_count(CurveFamily family, int grid_size);

/**
 * Mean growth curve family with its nominal parameter vector.
 *
 * Parameter layouts (index 0 first):
 *   Unstructured  mu_j = beta_j                                   p = J
 *   Ratio         mu_j = beta_1 t_j                               p = 1
 *   StraightLine  mu_j = beta_0 + beta_1 t_j                      p = 2
 *   Exponential   mu_j = beta_1 - (beta_1 - beta_0) exp(-beta_2 t_j)   p = 3
 *   Logistic      mu_j = beta_0 + (beta_1 - beta_0) / (1 + exp(-(beta_2 t_j + beta_3)))   p = 4
 *
 * Exponential and Logistic require beta_0 < beta_1 and beta_2 > 0.
 */
struct GrowthCurve {
    CurveFamily family = CurveFamily::StraightLine;
    VectorXd beta;

    [[nodiscard]] int parameters() const noexcept { return static_cast<int>(beta.size()); }
};

// Throws Error(InvalidModel) when beta does not fit the family or the grid.
void validate(const GrowthCurve& model, const TimeGrid& grid);

[[nodiscard]] VectorXd mean_curve(const GrowthCurve& model, const TimeGrid& grid);

// J x p matrix of first derivatives d mu_j / d beta_k.
[[nodiscard]] MatrixXd jacobian(const GrowthCurve& model, const TimeGrid& grid);

// Rank of the rows of A with positive weight equals the column count.
// Singular values below 1e-10 times the largest count as zero.
[[nodiscard]] bool check_estimable(const MatrixXd& jac, const VectorXd& weights);

}  // namespace growthdesign
