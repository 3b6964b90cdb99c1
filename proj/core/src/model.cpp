#include "growthdesign/model.hpp"

#include "growthdesign/error.hpp"

#include <cmath>
#include <string>

namespace growthdesign {

TimeGrid::TimeGrid(int count) : count_(count) {
    if (count < 1) {
        throw Error(ErrorCode::InvalidModel, "time grid needs at least one point");
    }
}

VectorXd TimeGrid::times() const {
    return VectorXd::LinSpaced(count_, 0.0, static_cast<double>(count_ - 1));
}

std::string_view to_string(CurveFamily family) noexcept {
    switch (family) {
        case CurveFamily::Unstructured: return "unstructured";
        case CurveFamily::Ratio: return "ratio";
        case CurveFamily::StraightLine: return "straight-line";
        case CurveFamily::Exponential: return "exponential";
        case CurveFamily::Logistic: return "logistic";
    }
    return "unknown";
}

std::optional<CurveFamily> parse_curve_family(std::string_view name) {
    if (name == "unstructured") return CurveFamily::Unstructured;
    if (name == "ratio") return CurveFamily::Ratio;
    if (name == "straight-line" || name == "line") return CurveFamily::StraightLine;
    if (name == "exponential") return CurveFamily::Exponential;
    if (name == "logistic") return CurveFamily::Logistic;
    return std::nullopt;
}

int parameter_count(CurveFamily family, int grid_size) {
    switch (family) {
        case CurveFamily::Unstructured: return grid_size;
        case CurveFamily::Ratio: return 1;
        case CurveFamily::StraightLine: return 2;
        case CurveFamily::Exponential: return 3;
        case CurveFamily::Logistic: return 4;
    }
    return 0;
}

void validate(const GrowthCurve& model, const TimeGrid& grid) {
    const int p = parameter_count(model.family, grid.size());
    const std::string name(to_string(model.family));
    if (model.parameters() != p) {
        throw Error(ErrorCode::InvalidModel,
                    name + " model expects " + std::to_string(p) + " parameters, got " +
                        std::to_string(model.parameters()));
    }
    if (p > grid.size()) {
        throw Error(ErrorCode::InvalidModel,
                    name + " model has more parameters than time points");
    }
    if (!model.beta.allFinite()) {
        throw Error(ErrorCode::InvalidModel, name + " model has non-finite parameters");
    }
    if (model.family == CurveFamily::Exponential || model.family == CurveFamily::Logistic) {
        if (!(model.beta[0] < model.beta[1])) {
            throw Error(ErrorCode::InvalidModel, name + " model requires beta_0 < beta_1");
        }
        if (!(model.beta[2] > 0.0)) {
            throw Error(ErrorCode::InvalidModel, name + " model requires beta_2 > 0");
        }
    }
}

namespace {

// Logistic function 1 / (1 + exp(-x)) without overflow for large |x|.
double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

VectorXd mean_curve(const GrowthCurve& model, const TimeGrid& grid) {
    validate(model, grid);
    const auto& b = model.beta;
    const int J = grid.size();
    VectorXd mu(J);
    for (int j = 0; j < J; ++j) {
        const double t = grid.time(j);
        switch (model.family) {
            case CurveFamily::Unstructured:
                mu[j] = b[j];
                break;
            case CurveFamily::Ratio:
                mu[j] = b[0] * t;
                break;
            case CurveFamily::StraightLine:
                mu[j] = b[0] + b[1] * t;
                break;
            case CurveFamily::Exponential:
                mu[j] = b[1] - (b[1] - b[0]) * std::exp(-b[2] * t);
                break;
            case CurveFamily::Logistic:
                mu[j] = b[0] + (b[1] - b[0]) * logistic(b[2] * t + b[3]);
                break;
        }
    }
    return mu;
}

MatrixXd jacobian(const GrowthCurve& model, const TimeGrid& grid) {
    validate(model, grid);
    const auto& b = model.beta;
    const int J = grid.size();
    const int p = model.parameters();
    MatrixXd jac = MatrixXd::Zero(J, p);
    for (int j = 0; j < J; ++j) {
        const double t = grid.time(j);
        switch (model.family) {
            case CurveFamily::Unstructured:
                jac(j, j) = 1.0;
                break;
            case CurveFamily::Ratio:
                jac(j, 0) = t;
                break;
            case CurveFamily::StraightLine:
                jac(j, 0) = 1.0;
                jac(j, 1) = t;
                break;
            case CurveFamily::Exponential: {
                const double decay = std::exp(-b[2] * t);
                jac(j, 0) = decay;
                jac(j, 1) = 1.0 - decay;
                jac(j, 2) = t * (b[1] - b[0]) * decay;
                break;
            }
            case CurveFamily::Logistic: {
                // d/d beta_0 = 1 / (1 + exp(x)) = 1 - s, d/d beta_3 = (b1 - b0) s (1 - s)
                const double s = logistic(b[2] * t + b[3]);
                const double lower = logistic(-(b[2] * t + b[3]));
                const double slope = (b[1] - b[0]) * s * lower;
                jac(j, 0) = lower;
                jac(j, 1) = 1.0 - lower;
                jac(j, 2) = t * slope;
                jac(j, 3) = slope;
                break;
            }
        }
    }
    return jac;
}

bool check_estimable(const MatrixXd& jac, const VectorXd& weights) {
    if (jac.rows() != weights.size() || jac.cols() == 0 || !jac.allFinite()) {
        return false;
    }
    const int p = static_cast<int>(jac.cols());
    MatrixXd rows(jac.rows(), p);
    int kept = 0;
    for (Eigen::Index j = 0; j < jac.rows(); ++j) {
        if (weights[j] > 0.0) {
            rows.row(kept++) = jac.row(j);
        }
    }
    if (kept < p) {
        return false;
    }
    const Eigen::JacobiSVD<MatrixXd> svd(rows.topRows(kept));
    const VectorXd& sv = svd.singularValues();
    if (sv.size() < p || sv[0] <= 0.0) {
        return false;
    }
    return sv[p - 1] > 1e-10 * sv[0];
}

}  // namespace growthdesign
