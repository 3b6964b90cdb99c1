#pragma once

// Independent reference computations used by the test suites. Nothing here
// calls the library's information or optimization code.

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Mean curves evaluated in long double straight from the model formulas.
long double exponential_mean(long double b0, long double b1, long double b2, long double t);
long double logistic_mean(long double b0, long double b1, long double b2, long double b3,
                          long double t);

// Sigma_gamma built entry by entry.
MatrixXd cs_matrix(double s2g, double rho, int J);
MatrixXd ar1_matrix(double s2g, double rho, int J);

// F^T V^{-1} F for integer counts, with V = s2 I + F Sigma F^T built
// explicitly and inverted densely.
MatrixXd dense_ftvf(const std::vector<int>& counts, const MatrixXd& sigma, double s2);

// A^T F^T V^{-1} F A via dense_ftvf.
MatrixXd dense_information(const std::vector<int>& counts, const MatrixXd& jac,
                           const MatrixXd& sigma, double s2);

// (s2 M0^{-1} + Sigma)^{-1} for strictly positive counts.
MatrixXd inverse_form(const VectorXd& counts, const MatrixXd& sigma, double s2);

// diag of (s2 I + Sigma M0)^{-1} A M^{-1} A^T (s2 I + M0 Sigma)^{-1}, computed
// with explicit dense inverses and M = A^T inverse_form A (all counts > 0).
VectorXd dense_psi(const VectorXd& counts, const MatrixXd& jac, const MatrixXd& sigma,
                   double s2);

// Every composition of `total` into J nonnegative integers.
void for_each_allocation(int total, int J, const std::function<void(const std::vector<int>&)>& f);

// Maximum of f over the simplex lattice {w : w_j = k_j step} for J <= 3.
struct GridMax {
    VectorXd arg;
    double value;
};
GridMax simplex_grid_max(int J, double step, const std::function<double(const VectorXd&)>& f);

// Uniform draw on the simplex.
VectorXd random_simplex(std::mt19937_64& rng, int J);

}  // namespace oracle
