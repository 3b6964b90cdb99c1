#include "growthdesign/covariance.hpp"

#include "growthdesign/error.hpp"

#include <cmath>
#include <cstdlib>
#include <numeric>
#include <string>

namespace growthdesign {

std::string_view to_string(CovarianceKind kind) noexcept {
    switch (kind) {
        case CovarianceKind::CompoundSymmetry: return "cs";
        case CovarianceKind::AR1: return "ar1";
    }
    return "unknown";
}

std::optional<CovarianceKind> parse_covariance_kind(std::string_view name) {
    if (name == "cs" || name == "CS" || name == "compound-symmetry") {
        return CovarianceKind::CompoundSymmetry;
    }
    if (name == "ar1" || name == "AR1") {
        return CovarianceKind::AR1;
    }
    return std::nullopt;
}

void validate(const CovarianceSpec& spec) {
    if (!std::isfinite(spec.sigma_eps_sq) || spec.sigma_eps_sq <= 0.0) {
        throw Error(ErrorCode::Parameter, "sigma_eps_sq must be positive and finite");
    }
    if (!std::isfinite(spec.sigma_gamma_sq) || spec.sigma_gamma_sq < 0.0) {
        throw Error(ErrorCode::Parameter, "sigma_gamma_sq must be nonnegative and finite");
    }
    if (!(spec.rho >= 0.0 && spec.rho <= 1.0)) {
        throw Error(ErrorCode::Parameter, "rho must lie in [0, 1]");
    }
}

CovarianceSpec spec_for_ratio(CovarianceKind kind, double a, double rho, double total_items,
                              double sigma_eps_sq) {
    if (!(total_items > 0.0)) {
        throw Error(ErrorCode::Parameter, "total item count must be positive");
    }
    CovarianceSpec spec{kind, a * sigma_eps_sq / total_items, rho, sigma_eps_sq};
    validate(spec);
    return spec;
}

int ExactDesignLayout::total() const noexcept {
    return std::accumulate(counts.begin(), counts.end(), 0);
}

void validate(const ExactDesignLayout& layout) {
    if (layout.counts.empty()) {
        throw Error(ErrorCode::Parameter, "exact design has no time points");
    }
    for (int c : layout.counts) {
        if (c < 0) {
            throw Error(ErrorCode::Parameter, "exact design counts must be nonnegative");
        }
    }
    if (layout.total() <= 0) {
        throw Error(ErrorCode::Parameter, "exact design must allocate at least one item");
    }
}

MatrixXd sigma_cs(const CovarianceSpec& spec, int J) {
    validate(spec);
    if (J < 1) {
        throw Error(ErrorCode::Parameter, "covariance needs at least one time point");
    }
    MatrixXd sigma = MatrixXd::Constant(J, J, spec.sigma_gamma_sq * spec.rho);
    sigma.diagonal().setConstant(spec.sigma_gamma_sq);
    return sigma;
}

MatrixXd sigma_ar1(const CovarianceSpec& spec, int J) {
    validate(spec);
    if (J < 1) {
        throw Error(ErrorCode::Parameter, "covariance needs at least one time point");
    }
    MatrixXd sigma(J, J);
    for (int i = 0; i < J; ++i) {
        for (int k = 0; k < J; ++k) {
            // std::pow(0, 0) == 1 keeps the diagonal intact for rho = 0
            sigma(i, k) = spec.sigma_gamma_sq * std::pow(spec.rho, std::abs(i - k));
        }
    }
    return sigma;
}

MatrixXd sigma_gamma(const CovarianceSpec& spec, int J) {
    return spec.kind == CovarianceKind::AR1 ? sigma_ar1(spec, J) : sigma_cs(spec, J);
}

MatrixXd item_incidence(const ExactDesignLayout& layout) {
    validate(layout);
    const int total = layout.total();
    if (total > kMaxFullCovarianceSize) {
        throw Error(ErrorCode::Resource,
                    "dense item-level matrices limited to " +
                        std::to_string(kMaxFullCovarianceSize) + " items");
    }
    MatrixXd f = MatrixXd::Zero(total, layout.size());
    int row = 0;
    for (int j = 0; j < layout.size(); ++j) {
        for (int i = 0; i < layout.counts[j]; ++i) {
            f(row++, j) = 1.0;
        }
    }
    return f;
}

MatrixXd build_full_v(const ExactDesignLayout& layout, const MatrixXd& sigma,
                      double sigma_eps_sq) {
    validate(layout);
    if (sigma.rows() != layout.size() || sigma.cols() != layout.size()) {
        throw Error(ErrorCode::Parameter, "covariance size does not match the design");
    }
    if (!(sigma_eps_sq > 0.0)) {
        throw Error(ErrorCode::Parameter, "sigma_eps_sq must be positive");
    }
    const MatrixXd f = item_incidence(layout);
    MatrixXd v = f * sigma * f.transpose();
    v.diagonal().array() += sigma_eps_sq;
    return v;
}

}  // namespace growthdesign
