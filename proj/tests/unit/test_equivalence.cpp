#include "growthdesign/equivalence.hpp"
#include "growthdesign/error.hpp"
#include "growthdesign/optimize.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace growthdesign;
using fixtures::curve;

namespace {

constexpr auto kCS = CovarianceKind::CompoundSymmetry;
constexpr auto kAR1 = CovarianceKind::AR1;

}  // namespace

TEST_SUITE("equivalence") {

TEST_CASE("psi agrees with the dense matrix product") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int J = 2 + rep % 6;
        const auto model = rep % 2 ? fixtures::unstructured(J) : curve(CurveFamily::StraightLine, {0, 1});
        const CovarianceSpec spec{rep % 3 ? kAR1 : kCS, 2.0 * u(rng), u(rng), 0.5 + u(rng)};
        const DesignWeights d(oracle::random_simplex(rng, J), 1.0 + 30.0 * u(rng));
        const VectorXd psi = psi_vector(d, model, spec);
        const VectorXd want = oracle::dense_psi(d.counts(), jacobian(model, TimeGrid(J)),
                                                sigma_gamma(spec, J), spec.sigma_eps_sq);
        CHECK((psi - want).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, want.cwiseAbs().maxCoeff()));
        CHECK(psi.minCoeff() >= 0.0);
    }
}

TEST_CASE("no random effect: fixed-effects sensitivity and equivalence") {
    // Sigma = 0 turns I psi_j into the classical variance function / s2.
    const int J = 5;
    const auto model = curve(CurveFamily::StraightLine, {0, 1});
    const CovarianceSpec spec{kCS, 0.0, 0.0, 2.0};
    const auto d = fixtures::weights({0.1, 0.2, 0.4, 0.2, 0.1}, 10.0);
    const MatrixXd a = jacobian(model, TimeGrid(J));
    const MatrixXd m = a.transpose() * (10.0 * d.weights()).asDiagonal() * a / 2.0;
    const VectorXd psi = psi_vector(d, model, spec);
    for (int j = 0; j < J; ++j) {
        const double variance = a.row(j) * m.inverse() * a.row(j).transpose();
        CHECK(10.0 * psi[j] == doctest::Approx(10.0 * variance / 4.0).epsilon(1e-12));
    }
    // The classical optimum for a line on [0, 4] puts half the mass at each end.
    const auto cert = check_optimality(fixtures::weights({0.5, 0, 0, 0, 0.5}, 10.0), model, spec);
    CHECK(cert.optimal);
    CHECK(cert.scaled_psi.maxCoeff() == doctest::Approx(cert.avg).epsilon(1e-12));
}

TEST_CASE("unstructured under CS: uniform is certified, all I psi_j equal") {
    for (int J = 2; J <= 6; ++J) {
        const CovarianceSpec spec{kCS, 0.9, 0.35, 1.0};
        const auto cert = check_optimality(DesignWeights::uniform(J, 12), fixtures::unstructured(J),
                                           spec, 1e-8);
        CHECK(cert.optimal);
        CHECK(cert.scaled_psi.maxCoeff() - cert.scaled_psi.minCoeff() < 1e-12);
        CHECK(cert.equality_violations.empty());

        VectorXd skew = VectorXd::Constant(J, 0.3 / (J - 1));
        skew[0] = 0.7;
        const auto bad = check_optimality(DesignWeights(skew, 12), fixtures::unstructured(J), spec, 1e-8);
        CHECK_FALSE(bad.optimal);
        CHECK(bad.gap > 0.0);
        CHECK_FALSE(bad.equality_violations.empty());
    }
}

TEST_CASE("straight line at the cubic-root design has equal I psi on its support") {
    const auto model = curve(CurveFamily::StraightLine, {0, 1});
    const auto spec = spec_for_ratio(kCS, 10.0, 0.0, 1.0);
    const double w = solve_line_j3_rho0(10.0).weight;
    const auto cert = check_optimality(fixtures::symmetric3(w), model, spec, 1e-8);
    CHECK(cert.scaled_psi.maxCoeff() - cert.scaled_psi.minCoeff() < 1e-8);
    CHECK(cert.optimal);
}

TEST_CASE("ratio closed form is certified") {
    const auto model = curve(CurveFamily::Ratio, {1});
    const auto spec = spec_for_ratio(kCS, 100.0, 0.5, 1.0);
    const auto cert = check_optimality(solve_ratio_closed_form(100.0, 0.5), model, spec);
    CHECK(cert.optimal);
}

TEST_CASE("closed-form optima pass at tol 1e-6") {
    SUBCASE("ratio") {
        const auto model = curve(CurveFamily::Ratio, {1});
        for (double a : {0.1, 1.0, 3.0, 10.0, 100.0, 1e4}) {
            for (double rho : {0.0, 0.2, 0.5, 0.9, 1.0}) {
                const auto spec = spec_for_ratio(kCS, a, rho, 1.0);
                CHECK(check_optimality(solve_ratio_closed_form(a, rho), model, spec, 1e-6).optimal);
            }
        }
    }
    SUBCASE("straight line, rho = 0") {
        const auto model = curve(CurveFamily::StraightLine, {0, 1});
        for (double a : {0.1, 0.5, 0.8, 1.0, 2.0, 10.0, 100.0, 1e4}) {
            const auto spec = spec_for_ratio(kCS, a, 0.0, 1.0);
            const auto d = fixtures::symmetric3(solve_line_j3_rho0(a).weight);
            CHECK(check_optimality(d, model, spec, 1e-6).optimal);
        }
    }
    SUBCASE("J = p = 3 under AR(1)") {
        for (double a : {1.0, 10.0, 50.0, 200.0}) {
            for (double rho : {0.0, 0.3, 0.6, 0.9, 1.0}) {
                const auto spec = spec_for_ratio(kAR1, a, rho, 1.0);
                const auto d = fixtures::symmetric3(solve_line_j3_ar1(a, rho).weight);
                CHECK(check_optimality(d, fixtures::unstructured(3), spec, 1e-6).optimal);
            }
        }
    }
    SUBCASE("J = p under compound symmetry") {
        for (int J = 2; J <= 7; ++J) {
            const CovarianceSpec spec{kCS, 3.0, 0.7, 1.0};
            CHECK(check_optimality(DesignWeights::uniform(J, 5), fixtures::unstructured(J), spec, 1e-6)
                      .optimal);
        }
    }
}

TEST_CASE("efficiency lower bound") {
    OptimalityCertificate cert;
    cert.gap = 0.0;
    CHECK(efficiency_lower_bound(cert, 3) == 1.0);
    cert.gap = 3.0 * std::log(2.0);
    CHECK(efficiency_lower_bound(cert, 3) == doctest::Approx(0.5).epsilon(1e-15));
    cert.gap = -1e-14;
    CHECK(efficiency_lower_bound(cert, 3) == 1.0);
    CHECK_THROWS_AS((void)efficiency_lower_bound(cert, 0), Error);

    SUBCASE("straight line uniform design") {
        const auto model = curve(CurveFamily::StraightLine, {0, 1});
        const auto spec = spec_for_ratio(kCS, 10.0, 0.0, 1.0);
        const auto uniform = DesignWeights::uniform(3, 1);
        const auto opt = fixtures::symmetric3(solve_line_j3_rho0(10.0).weight);
        const auto c = check_optimality(uniform, model, spec);
        CHECK(c.eff_lower_bound <= d_efficiency(uniform, opt, model, spec));
        CHECK(c.eff_lower_bound > 0.0);
    }
}

TEST_CASE("certificate invariants on random designs") {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int checked = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const int J = 3 + rep % 5;
        const auto model = rep % 2 ? curve(CurveFamily::Exponential, {0, 1 + 4 * u(rng), 0.3 + u(rng)})
                                   : curve(CurveFamily::StraightLine, {0, 1});
        const double s2 = rep % 4 == 0 ? 2.5 : 1.0;
        const auto problem = fixtures::by_variance(model, J, rep % 3 ? kAR1 : kCS, 2.0 * u(rng),
                                                   u(rng), 1.0 + 50.0 * u(rng), s2);
        const DesignWeights d(oracle::random_simplex(rng, J), problem.total_items);
        const auto cert = check_optimality(d, problem.model, problem.spec);
        CHECK(cert.gap >= -1e-12);

        // Bound validity against the solved optimum.
        const auto opt = solve_numeric(problem);
        CHECK(cert.eff_lower_bound <= d_efficiency(d, opt.design, problem.model, problem.spec) + 1e-9);

        // Optimal => bound >= exp(-tol scale / p) for the solver output.
        const auto c = check_optimality(opt.design, problem.model, problem.spec, 1e-8);
        REQUIRE(c.optimal);
        CHECK(c.eff_lower_bound >= std::exp(-c.derivative_scale * 1e-8 / problem.parameters()));
        ++checked;
    }
    CHECK(checked == 200);
}

TEST_CASE("psi is continuous at the boundary") {
    const auto model = curve(CurveFamily::Exponential, {0, 2, 0.5});
    const CovarianceSpec spec{kAR1, 0.6, 0.5, 1.0};
    VectorXd w(5);
    w << 0.3, 0.0, 0.3, 0.2, 0.2;
    const VectorXd base = psi_vector(DesignWeights(w, 20), model, spec);
    VectorXd nudged = w;
    nudged[1] = 1e-9;
    nudged /= nudged.sum();
    const VectorXd moved = psi_vector(DesignWeights(nudged, 20), model, spec);
    CHECK((moved - base).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("non-estimable designs raise a certificate error") {
    const auto model = curve(CurveFamily::StraightLine, {0, 1});
    const CovarianceSpec spec{kCS, 1.0, 0.3, 1.0};
    try {
        (void)check_optimality(fixtures::weights({0, 1, 0}), model, spec);
        FAIL("non-estimable design certified");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Certificate);
    }
    CHECK_THROWS_AS((void)psi_vector(fixtures::weights({0, 0, 1}), model, spec), Error);
}

TEST_CASE("soundness against a 0.001 grid search") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 6; ++rep) {
        const int J = rep % 2 ? 3 : 2;
        const auto model = J == 2 ? curve(CurveFamily::Ratio, {1}) : curve(CurveFamily::StraightLine, {0, 1});
        const auto problem = fixtures::by_ratio(model, J, rep % 3 ? kAR1 : kCS, 0.5 + 50.0 * u(rng), u(rng));
        const auto opt = solve_numeric(problem);
        REQUIRE(check_optimality(opt.design, problem.model, problem.spec, 1e-8).optimal);
        const auto eval = problem.evaluator();
        const auto grid = oracle::simplex_grid_max(J, 0.001, [&](const VectorXd& w) { return eval.log_det(w); });
        CHECK(grid.value <= opt.criterion + 1e-7);
    }
}

}  // TEST_SUITE
