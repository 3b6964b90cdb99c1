#pragma once

#include "growthdesign/optimize.hpp"

#include <initializer_list>

namespace fixtures {

using namespace growthdesign;

inline GrowthCurve curve(CurveFamily family, std::initializer_list<double> beta) {
    GrowthCurve m;
    m.family = family;
    m.beta = VectorXd(static_cast<Eigen::Index>(beta.size()));
    Eigen::Index i = 0;
    for (double b : beta) m.beta[i++] = b;
    return m;
}

inline GrowthCurve unstructured(int J) {
    return GrowthCurve{CurveFamily::Unstructured, VectorXd::Zero(J)};
}

// Problem with sigma_gamma^2 chosen so that I sigma_gamma^2 / sigma_eps^2 = a.
inline DesignProblem by_ratio(GrowthCurve model, int J, CovarianceKind kind, double a,
                              double rho, double total_items = 1.0) {
    DesignProblem p;
    p.time_points = J;
    p.model = std::move(model);
    p.spec = spec_for_ratio(kind, a, rho, total_items);
    p.total_items = total_items;
    return p;
}

inline DesignProblem by_variance(GrowthCurve model, int J, CovarianceKind kind, double s2g,
                                 double rho, double total_items, double s2 = 1.0) {
    DesignProblem p;
    p.time_points = J;
    p.model = std::move(model);
    p.spec = CovarianceSpec{kind, s2g, rho, s2};
    p.total_items = total_items;
    return p;
}

inline DesignWeights weights(std::initializer_list<double> w, double total_items = 1.0) {
    VectorXd v(static_cast<Eigen::Index>(w.size()));
    Eigen::Index i = 0;
    for (double x : w) v[i++] = x;
    return DesignWeights::normalized(v, total_items);
}

inline DesignWeights symmetric3(double w1, double total_items = 1.0) {
    return weights({w1, 1.0 - 2.0 * w1, w1}, total_items);
}

}  // namespace fixtures
