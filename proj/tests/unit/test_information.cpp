#include "growthdesign/error.hpp"
#include "growthdesign/information.hpp"
#include "growthdesign/optimize.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

using namespace growthdesign;
using fixtures::curve;

namespace {

constexpr auto kCS = CovarianceKind::CompoundSymmetry;
constexpr auto kAR1 = CovarianceKind::AR1;

double max_abs_diff(const MatrixXd& a, const MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("information") {

TEST_CASE("design weights validation") {
    CHECK_THROWS_AS(DesignWeights(Eigen::Vector2d(0.5, 0.6), 1.0), Error);
    CHECK_THROWS_AS(DesignWeights(Eigen::Vector2d(1.5, -0.5), 1.0), Error);
    CHECK_THROWS_AS(DesignWeights(Eigen::Vector2d(0.5, 0.5), 0.0), Error);
    CHECK_NOTHROW(DesignWeights(Eigen::Vector2d(0.5, 0.5), 3.0));
    const auto d = DesignWeights::from_counts(ExactDesignLayout{{4, 3, 3}});
    CHECK(d.total_items() == 10.0);
    CHECK(d.weight(0) == doctest::Approx(0.4));
    CHECK(d.counts().isApprox(Eigen::Vector3d(4, 3, 3)));
    CHECK(DesignWeights::uniform(4, 8).support_size() == 4);
    CHECK(fixtures::weights({1, 0, 0}).support_size() == 1);
}

TEST_CASE("core information: closed cases") {
    SUBCASE("no random effect") {
        const auto d = fixtures::weights({0.2, 0.3, 0.5}, 10.0);
        const MatrixXd c = core_info(d, MatrixXd::Zero(3, 3), 2.0);
        const MatrixXd want = (10.0 * d.weights() / 2.0).asDiagonal();
        CHECK(max_abs_diff(c, want) < 1e-14);
    }
    SUBCASE("a zero weight annihilates its row and column") {
        const auto d = fixtures::weights({1, 0});
        const MatrixXd c = core_info(d, sigma_cs({kCS, 1.0, 0.5, 1.0}, 2), 1.0);
        CHECK(c(0, 0) > 0.0);
        CHECK(c(0, 1) == 0.0);
        CHECK(c(1, 0) == 0.0);
        CHECK(c(1, 1) == 0.0);
    }
    SUBCASE("small explicit layout") {
        const auto sigma = sigma_cs({kCS, 1.0, 0.5, 1.0}, 2);
        const auto d = DesignWeights::from_counts(ExactDesignLayout{{2, 1}});
        CHECK(max_abs_diff(core_info(d, sigma, 1.0), oracle::dense_ftvf({2, 1}, sigma, 1.0)) <
              1e-10);
    }
    SUBCASE("invalid error variance") {
        CHECK_THROWS_AS((void)core_info(DesignWeights::uniform(2, 1), MatrixXd::Identity(2, 2), 0.0),
                        Error);
    }
}

TEST_CASE("core information equals the explicit dense construction") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> count(0, 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    int with_zero = 0;
    for (int rep = 0; rep < 500; ++rep) {
        const int J = 1 + rep % 6;
        std::vector<int> counts(J);
        int total = 0;
        do {
            total = 0;
            for (auto& c : counts) {
                c = count(rng);
                total += c;
            }
        } while (total == 0 || total > 30);
        with_zero += std::count(counts.begin(), counts.end(), 0) > 0 ? 1 : 0;
        const CovarianceSpec spec{rep % 2 ? kAR1 : kCS, 3.0 * u(rng), u(rng), 0.2 + 2.0 * u(rng)};
        const auto sigma = sigma_gamma(spec, J);
        const auto d = DesignWeights::from_counts(ExactDesignLayout{counts});
        const MatrixXd got = core_info(d, sigma, spec.sigma_eps_sq);
        const MatrixXd want = oracle::dense_ftvf(counts, sigma, spec.sigma_eps_sq);
        worst = std::max(worst, max_abs_diff(got, want));

        // The library's own dense builder agrees with the test oracle as well.
        const MatrixXd v = build_full_v(ExactDesignLayout{counts}, sigma, spec.sigma_eps_sq);
        const MatrixXd f = item_incidence(ExactDesignLayout{counts});
        worst = std::max(worst, max_abs_diff(f.transpose() * v.inverse() * f, want));
    }
    CHECK(with_zero > 50);
    CHECK(worst < 1e-10);
}

TEST_CASE("inverse-of-sum identity") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int m = 1 + rep % 8;
        const int J = 1 + (rep / 8) % 8;
        MatrixXd c(m, J);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < J; ++j) c(i, j) = n(rng);
        }
        const MatrixXd lhs = (MatrixXd::Identity(m, m) + c * c.transpose()).inverse();
        const MatrixXd rhs = MatrixXd::Identity(m, m) -
                             c * (MatrixXd::Identity(J, J) + c.transpose() * c).inverse() *
                                 c.transpose();
        CHECK(max_abs_diff(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("unstructured model: inverse information is s2 M0^-1 + Sigma") {
    const int J = 4;
    const CovarianceSpec spec{kAR1, 0.7, 0.4, 1.3};
    const auto d = fixtures::weights({0.1, 0.2, 0.3, 0.4}, 20.0);
    const auto info = fisher_info(d, fixtures::unstructured(J), spec);
    REQUIRE_FALSE(info.singular);
    MatrixXd want = sigma_gamma(spec, J);
    for (int j = 0; j < J; ++j) {
        want(j, j) += spec.sigma_eps_sq / (20.0 * d.weight(j));
    }
    CHECK(max_abs_diff(info.m.inverse(), want) < 1e-12);
}

TEST_CASE("singular designs") {
    const auto line = curve(CurveFamily::StraightLine, {0, 1});
    const CovarianceSpec spec{kCS, 1.0, 0.3, 1.0};
    const auto info = fisher_info(fixtures::weights({1, 0, 0}), line, spec);
    CHECK(info.singular);
    CHECK(info.logdet == -std::numeric_limits<double>::infinity());
    CHECK(log_det_criterion(fixtures::weights({1, 0, 0}), line, spec) ==
          -std::numeric_limits<double>::infinity());
    CHECK(std::isfinite(log_det_criterion(fixtures::weights({1, 0, 1}), line, spec)));
}

TEST_CASE("logistic information against the dense oracle") {
    const auto model = curve(CurveFamily::Logistic, {0, 1, 1, 0});
    const CovarianceSpec spec{kCS, 1.0, 0.5, 1.0};
    const MatrixXd jac = jacobian(model, TimeGrid(7));
    const MatrixXd sigma = sigma_gamma(spec, 7);

    SUBCASE("I = 100, uniform: real-valued counts via (s2 M0^-1 + Sigma)^-1") {
        const auto d = DesignWeights::uniform(7, 100);
        const auto info = fisher_info(d, model, spec);
        REQUIRE_FALSE(info.singular);
        CHECK(info.m.rows() == 4);
        CHECK(max_abs_diff(info.m, info.m.transpose()) < 1e-12);
        CHECK(Eigen::SelfAdjointEigenSolver<MatrixXd>(info.m).eigenvalues().minCoeff() > 0.0);
        const MatrixXd want = jac.transpose() * oracle::inverse_form(d.counts(), sigma, 1.0) * jac;
        CHECK(std::abs(info.logdet - std::log(want.determinant())) < 1e-8);
    }
    SUBCASE("I = 70, uniform: explicit F and V") {
        const auto d = DesignWeights::uniform(7, 70);
        const auto info = fisher_info(d, model, spec);
        const MatrixXd want = oracle::dense_information({10, 10, 10, 10, 10, 10, 10}, jac, sigma, 1.0);
        CHECK(std::abs(info.logdet - std::log(want.determinant())) < 1e-8);
    }
}

TEST_CASE("uniform design maximizes the criterion for the unstructured model under CS") {
    std::mt19937_64 rng(31);
    const int J = 4;
    const CovarianceSpec spec{kCS, 0.8, 0.6, 1.0};
    const auto model = fixtures::unstructured(J);
    const double best = log_det_criterion(DesignWeights::uniform(J, 10), model, spec);
    int beaten = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        const DesignWeights d(oracle::random_simplex(rng, J), 10);
        if (log_det_criterion(d, model, spec) > best + 1e-12) ++beaten;
    }
    CHECK(beaten == 0);
}

TEST_CASE("cubic-root design beats uniform for the straight line") {
    const auto model = curve(CurveFamily::StraightLine, {0, 1});
    const auto spec = spec_for_ratio(kCS, 10.0, 0.0, 1.0);
    const double w = solve_line_j3_rho0(10.0).weight;
    CHECK(log_det_criterion(fixtures::symmetric3(w), model, spec) >
          log_det_criterion(DesignWeights::uniform(3, 1), model, spec));
}

TEST_CASE("D-efficiency") {
    const auto line = curve(CurveFamily::StraightLine, {0, 1});
    const CovarianceSpec spec{kCS, 0.5, 0.2, 1.0};
    const auto d = fixtures::weights({0.3, 0.3, 0.4}, 4);
    CHECK(d_efficiency(d, d, line, spec) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d_efficiency(fixtures::weights({1, 0, 0}, 4), d, line, spec) == 0.0);
    try {
        (void)d_efficiency(d, fixtures::weights({0, 1, 0}, 4), line, spec);
        FAIL("singular reference accepted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Parameter);
    }

    SUBCASE("ratio model: one-point design approaches 1 - rho^2") {
        const auto ratio = curve(CurveFamily::Ratio, {1});
        const double a = 1e6;
        const double rho = 0.5;
        const auto s = spec_for_ratio(kCS, a, rho, 1.0);
        const double eff = d_efficiency(fixtures::weights({0, 1}),
                                        solve_ratio_closed_form(a, rho), ratio, s);
        CHECK(std::abs(eff - 0.75) < 1e-3);
    }

    SUBCASE("straight line: uniform efficiency rises towards 1 with a") {
        double prev = 0.0;
        for (double a : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1e3, 1e4, 1e6}) {
            const auto s = spec_for_ratio(kCS, a, 0.0, 1.0);
            const double w = solve_line_j3_rho0(a).weight;
            const double eff =
                d_efficiency(DesignWeights::uniform(3, 1), fixtures::symmetric3(w), line, s);
            CHECK(eff >= prev - 1e-12);
            CHECK(eff <= 1.0 + 1e-12);
            prev = eff;
        }
        CHECK(prev > 0.99);
        const double at_zero = d_efficiency(DesignWeights::uniform(3, 1),
                                            fixtures::weights({0.5, 0, 0.5}), line,
                                            spec_for_ratio(kCS, 0.0, 0.0, 1.0));
        CHECK(at_zero < 0.9);
    }
}

TEST_CASE("criterion is concave") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const int J = 3 + rep % 5;
        const auto model = rep % 3 == 0   ? curve(CurveFamily::Exponential, {0, 1 + 4 * u(rng), 0.2 + 2 * u(rng)})
                           : rep % 3 == 1 ? curve(CurveFamily::StraightLine, {0, 1})
                                          : fixtures::unstructured(J);
        const CovarianceSpec spec{rep % 2 ? kAR1 : kCS, 2.0 * u(rng), u(rng), 1.0};
        const double I = 1.0 + 100.0 * u(rng);
        const DesignWeights a(oracle::random_simplex(rng, J), I);
        const DesignWeights b(oracle::random_simplex(rng, J), I);
        const double ca = log_det_criterion(a, model, spec);
        const double cb = log_det_criterion(b, model, spec);
        for (double lambda : {0.25, 0.5, 0.75}) {
            const DesignWeights mix =
                DesignWeights::normalized(lambda * a.weights() + (1 - lambda) * b.weights(), I);
            CHECK(log_det_criterion(mix, model, spec) >= lambda * ca + (1 - lambda) * cb - 1e-9);
            ++checked;
        }
    }
    CHECK(checked == 900);
}

TEST_CASE("compound symmetry: simultaneous permutation invariance") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int J = 2 + rep % 6;
        const CovarianceSpec spec{kCS, 2.0 * u(rng), u(rng), 1.0};
        const MatrixXd sigma = sigma_gamma(spec, J);
        const MatrixXd jac = jacobian(curve(CurveFamily::StraightLine, {0, 1}), TimeGrid(J));
        const VectorXd w = oracle::random_simplex(rng, J);
        Eigen::PermutationMatrix<Eigen::Dynamic> p(J);
        p.setIdentity();
        std::shuffle(p.indices().data(), p.indices().data() + J, rng);
        const CriterionEvaluator base(jac, sigma, 1.0, 5.0);
        const CriterionEvaluator moved(p * jac, sigma, 1.0, 5.0);
        CHECK(std::abs(base.log_det(w) - moved.log_det(p * w)) < 1e-10);

        // Unstructured with J = p: permuting the weights alone is enough.
        const auto un = fixtures::unstructured(J);
        CHECK(std::abs(log_det_criterion(DesignWeights(w, 5), un, spec) -
                       log_det_criterion(DesignWeights(p * w, 5), un, spec)) < 1e-10);
    }
}

TEST_CASE("AR(1): time-reversal invariance") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int J = 2 + rep % 6;
        const CovarianceSpec spec{kAR1, 2.0 * u(rng), u(rng), 1.0};
        const VectorXd w = oracle::random_simplex(rng, J);
        const VectorXd rev = w.reverse();
        for (const auto& model : {fixtures::unstructured(J), curve(CurveFamily::StraightLine, {0, 1})}) {
            CHECK(std::abs(log_det_criterion(DesignWeights(w, 3), model, spec) -
                           log_det_criterion(DesignWeights(rev, 3), model, spec)) < 1e-10);
        }
    }
}

TEST_CASE("J = p: the optimal design does not depend on beta") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 10; ++rep) {
        const auto kind = rep % 2 ? kAR1 : kCS;
        const double s2g = 2.0 * u(rng);
        const double rho = u(rng);
        const auto first = fixtures::by_variance(
            curve(CurveFamily::Exponential, {0, 1 + 5 * u(rng), 0.2 + 3 * u(rng)}), 3, kind, s2g,
            rho, 10);
        const auto second = fixtures::by_variance(
            curve(CurveFamily::Exponential, {-1, 2 + 5 * u(rng), 0.2 + 3 * u(rng)}), 3, kind, s2g,
            rho, 10);
        const auto a = solve_numeric(first);
        const auto b = solve_numeric(second);
        CHECK((a.design.weights() - b.design.weights()).lpNorm<Eigen::Infinity>() < 1e-6);
    }
}

TEST_CASE("evaluator derivatives agree with finite differences") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 60; ++rep) {
        const int J = 3 + rep % 5;
        const auto model = rep % 2 ? curve(CurveFamily::Exponential, {0, 2, 0.7})
                                   : curve(CurveFamily::StraightLine, {0, 1});
        const CovarianceSpec spec{rep % 3 ? kAR1 : kCS, 2.0 * u(rng), u(rng), 0.5 + u(rng)};
        const auto eval = make_evaluator(model, spec, J, 1.0 + 20.0 * u(rng));
        const VectorXd w = oracle::random_simplex(rng, J);
        const auto pt = eval.evaluate(w, CriterionEvaluator::Detail::Hessian);
        REQUIRE_FALSE(pt.singular);
        const double h = 1e-6;
        for (int j = 0; j < J; ++j) {
            if (w[j] < 1e-4) continue;
            VectorXd up = w;
            VectorXd down = w;
            up[j] += h;
            down[j] -= h;
            const double fd = (eval.log_det(up) - eval.log_det(down)) / (2 * h);
            CHECK(std::abs(fd - pt.gradient[j]) <= 1e-5 * std::max(1.0, std::abs(fd)));
            const auto gu = eval.evaluate(up, CriterionEvaluator::Detail::Gradient).gradient;
            const auto gd = eval.evaluate(down, CriterionEvaluator::Detail::Gradient).gradient;
            const VectorXd col = (gu - gd) / (2 * h);
            for (int k = 0; k < J; ++k) {
                CHECK(std::abs(col[k] - pt.hessian(k, j)) <=
                      1e-4 * std::max(1.0, std::abs(col[k])));
            }
        }
    }
}

}  // TEST_SUITE
