#include "growthdesign/equivalence.hpp"

#include "growthdesign/error.hpp"

#include <algorithm>
#include <cmath>

namespace growthdesign {

namespace {

CriterionEvaluator::Point estimable_point(const CriterionEvaluator& eval,
                                          const VectorXd& weights) {
    if (!check_estimable(eval.jacobian(), weights)) {
        throw Error(ErrorCode::Certificate, "parameters are not estimable under the design");
    }
    auto point = eval.evaluate(weights, CriterionEvaluator::Detail::Gradient);
    if (point.singular) {
        throw Error(ErrorCode::Certificate, "information matrix is numerically singular");
    }
    return point;
}

}  // namespace

VectorXd psi_vector(const DesignWeights& design, const GrowthCurve& model,
                    const CovarianceSpec& spec) {
    const auto eval = make_evaluator(model, spec, design.size(), design.total_items());
    return estimable_point(eval, design.weights()).psi;
}

OptimalityCertificate certify(const CriterionEvaluator& eval, const VectorXd& weights,
                              double tol) {
    const auto point = estimable_point(eval, weights);
    OptimalityCertificate cert;
    cert.tol = tol;
    cert.derivative_scale = eval.sigma_eps_sq();
    cert.psi = point.psi;
    cert.scaled_psi = point.scaled_psi;
    cert.avg = weights.dot(point.scaled_psi);
    cert.gap = point.scaled_psi.maxCoeff() - cert.avg;
    cert.optimal = cert.gap <= tol;
    for (int j = 0; j < weights.size(); ++j) {
        if (weights[j] > kSupportThreshold && std::abs(point.scaled_psi[j] - cert.avg) > tol) {
            cert.equality_violations.push_back(j);
        }
    }
    cert.eff_lower_bound = efficiency_lower_bound(cert, eval.parameters());
    return cert;
}

OptimalityCertificate check_optimality(const DesignWeights& design, const GrowthCurve& model,
                                       const CovarianceSpec& spec, double tol) {
    const auto eval = make_evaluator(model, spec, design.size(), design.total_items());
    return certify(eval, design.weights(), tol);
}

double efficiency_lower_bound(const OptimalityCertificate& cert, int p) {
    if (p < 1) {
        throw Error(ErrorCode::Parameter, "parameter count must be positive");
    }
    const double gap = std::max(cert.gap, 0.0);
    return std::exp(-cert.derivative_scale * gap / p);
}

}  // namespace growthdesign
