#include "growthdesign/information.hpp"

#include "growthdesign/error.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace growthdesign {

namespace {

constexpr double kWeightSumTolerance = 1e-12;

const double kLogSingular = std::log(kSingularDeterminant);

void check_weights(const VectorXd& w) {
    if (w.size() < 1 || w.size() > kMaxTimePoints) {
        throw Error(ErrorCode::Parameter,
                    "design must cover between 1 and " + std::to_string(kMaxTimePoints) +
                        " time points");
    }
    if (!w.allFinite() || (w.array() < 0.0).any()) {
        throw Error(ErrorCode::Parameter, "design weights must be finite and nonnegative");
    }
}

}  // namespace

DesignWeights::DesignWeights(VectorXd weights, double total_items)
    : weights_(std::move(weights)), total_items_(total_items) {
    check_weights(weights_);
    if (std::abs(weights_.sum() - 1.0) > kWeightSumTolerance) {
        throw Error(ErrorCode::Parameter, "design weights must sum to one");
    }
    if (!(total_items_ > 0.0) || !std::isfinite(total_items_)) {
        throw Error(ErrorCode::Parameter, "item budget must be positive");
    }
}

DesignWeights DesignWeights::normalized(const VectorXd& raw, double total_items) {
    check_weights(raw);
    const double sum = raw.sum();
    if (!(sum > 0.0)) {
        throw Error(ErrorCode::Parameter, "design weights must have a positive sum");
    }
    return DesignWeights(raw / sum, total_items);
}

DesignWeights DesignWeights::uniform(int J, double total_items) {
    if (J < 1) {
        throw Error(ErrorCode::Parameter, "design needs at least one time point");
    }
    return DesignWeights(VectorXd::Constant(J, 1.0 / J), total_items);
}

DesignWeights DesignWeights::from_counts(const ExactDesignLayout& layout) {
    validate(layout);
    VectorXd raw(layout.size());
    for (int j = 0; j < layout.size(); ++j) {
        raw[j] = layout.counts[j];
    }
    return normalized(raw, layout.total());
}

int DesignWeights::support_size(double threshold) const noexcept {
    return static_cast<int>((weights_.array() > threshold).count());
}

CriterionEvaluator::CriterionEvaluator(MatrixXd jac, MatrixXd sigma, double sigma_eps_sq,
                                       double total_items)
    : jac_(std::move(jac)),
      sigma_(std::move(sigma)),
      sigma_eps_sq_(sigma_eps_sq),
      total_items_(total_items) {
    const auto J = jac_.rows();
    if (J < 1 || J > kMaxTimePoints) {
        throw Error(ErrorCode::Parameter, "unsupported number of time points");
    }
    if (sigma_.rows() != J || sigma_.cols() != J) {
        throw Error(ErrorCode::Parameter, "covariance size does not match the Jacobian");
    }
    if (jac_.cols() < 1 || jac_.cols() > J) {
        throw Error(ErrorCode::InvalidModel, "Jacobian must have between 1 and J columns");
    }
    if (!(sigma_eps_sq_ > 0.0)) {
        throw Error(ErrorCode::Parameter, "sigma_eps_sq must be positive");
    }
    if (!(total_items_ > 0.0)) {
        throw Error(ErrorCode::Parameter, "item budget must be positive");
    }
}

MatrixXd CriterionEvaluator::core(const VectorXd& weights) const {
    const VectorXd s = (total_items_ * weights.cwiseMax(0.0)).cwiseSqrt();
    MatrixXd k = s.asDiagonal() * sigma_ * s.asDiagonal();
    k.diagonal().array() += sigma_eps_sq_;
    const Eigen::LDLT<MatrixXd> ldlt(k);
    const auto J = weights.size();
    MatrixXd core = ldlt.solve(MatrixXd::Identity(J, J));
    core = s.asDiagonal() * core * s.asDiagonal();
    return 0.5 * (core + core.transpose());
}

CriterionEvaluator::Point CriterionEvaluator::evaluate(const VectorXd& weights,
                                                       Detail detail) const {
    if (weights.size() != jac_.rows()) {
        throw Error(ErrorCode::Parameter, "design size does not match the time grid");
    }
    Point out;
    const MatrixXd core_m = core(weights);
    const MatrixXd core_a = core_m * jac_;
    out.info = jac_.transpose() * core_a;
    out.info = 0.5 * (out.info + out.info.transpose());

    const int p = parameters();
    out.logdet = -std::numeric_limits<double>::infinity();
    if ((weights.array() > 0.0).count() < p) {
        return out;
    }
    const Eigen::LDLT<MatrixXd> info_ldlt(out.info);
    const VectorXd d = info_ldlt.vectorD();
    if (info_ldlt.info() != Eigen::Success || (d.array() <= 0.0).any()) {
        return out;
    }
    const double logdet = d.array().log().sum();
    if (!std::isfinite(logdet) || logdet <= kLogSingular) {
        return out;
    }
    out.logdet = logdet;
    out.singular = false;
    if (detail == Detail::Value) {
        return out;
    }

    // B = (sigma_eps^2 I + Sigma M0)^{-1} A
    const MatrixXd b = (jac_ - sigma_ * core_a) / sigma_eps_sq_;
    const MatrixXd minv_bt = info_ldlt.solve(b.transpose());
    const MatrixXd g = b * minv_bt;
    out.psi = g.diagonal();
    out.scaled_psi = total_items_ * out.psi;
    out.gradient = total_items_ * sigma_eps_sq_ * out.psi;
    if (detail == Detail::Gradient) {
        return out;
    }

    // Q = (sigma_eps^2 I + Sigma M0)^{-1} Sigma, symmetric
    MatrixXd q = (sigma_ - sigma_ * core_m * sigma_) / sigma_eps_sq_;
    q = 0.5 * (q + q.transpose());
    const double c = total_items_;
    out.hessian = -c * c * sigma_eps_sq_ *
                  (2.0 * q.cwiseProduct(g) + sigma_eps_sq_ * g.cwiseProduct(g));
    out.hessian = 0.5 * (out.hessian + out.hessian.transpose());
    return out;
}

double CriterionEvaluator::log_det(const VectorXd& weights) const {
    return evaluate(weights, Detail::Value).logdet;
}

CriterionEvaluator make_evaluator(const GrowthCurve& model, const CovarianceSpec& spec, int J,
                                  double total_items) {
    const TimeGrid grid(J);
    return CriterionEvaluator(jacobian(model, grid), sigma_gamma(spec, J), spec.sigma_eps_sq,
                              total_items);
}

MatrixXd core_info(const DesignWeights& design, const MatrixXd& sigma, double sigma_eps_sq) {
    if (!(sigma_eps_sq > 0.0)) {
        throw Error(ErrorCode::Parameter, "sigma_eps_sq must be positive");
    }
    const int J = design.size();
    if (sigma.rows() != J || sigma.cols() != J) {
        throw Error(ErrorCode::Parameter, "covariance size does not match the design");
    }
    const CriterionEvaluator eval(MatrixXd::Identity(J, J), sigma, sigma_eps_sq,
                                  design.total_items());
    return eval.core(design.weights());
}

InfoMatrix fisher_info(const DesignWeights& design, const GrowthCurve& model,
                       const CovarianceSpec& spec) {
    const auto eval = make_evaluator(model, spec, design.size(), design.total_items());
    const auto point = eval.evaluate(design.weights(), CriterionEvaluator::Detail::Value);
    InfoMatrix info{point.info, point.logdet, point.singular};
    if (!info.singular && !check_estimable(eval.jacobian(), design.weights())) {
        info.singular = true;
    }
    if (info.singular) {
        info.logdet = -std::numeric_limits<double>::infinity();
    }
    return info;
}

double log_det_criterion(const DesignWeights& design, const GrowthCurve& model,
                         const CovarianceSpec& spec) {
    return fisher_info(design, model, spec).logdet;
}

double d_efficiency(const DesignWeights& candidate, const DesignWeights& reference,
                    const GrowthCurve& model, const CovarianceSpec& spec) {
    if (candidate.size() != reference.size()) {
        throw Error(ErrorCode::Parameter, "designs cover different time grids");
    }
    const InfoMatrix ref = fisher_info(reference, model, spec);
    if (ref.singular) {
        throw Error(ErrorCode::Parameter, "reference design is singular");
    }
    const InfoMatrix cand = fisher_info(candidate, model, spec);
    if (cand.singular) {
        return 0.0;
    }
    return std::exp((cand.logdet - ref.logdet) / model.parameters());
}

}  // namespace growthdesign
