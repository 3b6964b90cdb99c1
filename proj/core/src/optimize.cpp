#include "growthdesign/optimize.hpp"

#include "growthdesign/error.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

namespace growthdesign {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kGoldenIterations = 40;
constexpr double kZeroClamp = 1e-10;

// ---------------------------------------------------------------------------
// Line search
// ---------------------------------------------------------------------------

struct LineMax {
    double arg = 0.0;
    double value = -kInf;
};

// Golden-section search for the maximum of a concave function on [lo, hi].
// The endpoints are also evaluated so boundary maxima are hit exactly.
LineMax golden_max(const std::function<double(double)>& f, double lo, double hi,
                   double f_lo) {
    static const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
    LineMax best{lo, f_lo};
    const auto consider = [&best](double x, double fx) {
        if (fx > best.value) {
            best = {x, fx};
        }
    };
    const double f_hi = f(hi);
    consider(hi, f_hi);
    double a = lo;
    double b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < kGoldenIterations; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    consider(c, fc);
    consider(d, fd);
    return best;
}

void renormalize(VectorXd& w) {
    w = w.cwiseMax(0.0);
    w /= w.sum();
}

// ---------------------------------------------------------------------------
// Single-start ascent
// ---------------------------------------------------------------------------

struct Ascent {
    VectorXd weights;
    double logdet = -kInf;
    int iterations = 0;
};

class Ascender {
public:
    Ascender(const CriterionEvaluator& eval, const SolverOptions& opts)
        : eval_(eval), opts_(opts), target_(opts.gap_tol * 1e-2) {}

    Ascent run(VectorXd w) const {
        Ascent out;
        double logdet = eval_.log_det(w);
        int it = 0;

        // Vertex-direction phase: rough support identification.
        const int vertex_budget = std::min(opts_.max_iters, 2 * static_cast<int>(w.size()));
        for (; it < vertex_budget; ++it) {
            const auto pt = eval_.evaluate(w, CriterionEvaluator::Detail::Gradient);
            if (pt.singular) {
                break;
            }
            const double mean = w.dot(pt.scaled_psi);
            Eigen::Index top = 0;
            const double gap = pt.scaled_psi.maxCoeff(&top) - mean;
            if (gap <= 1e-3 * std::max(1.0, std::abs(mean))) {
                break;
            }
            logdet = vertex_step(w, top, pt.logdet);
        }

        int stalls = 0;
        for (; it < opts_.max_iters; ++it) {
            const auto pt = eval_.evaluate(w, CriterionEvaluator::Detail::Hessian);
            if (pt.singular) {
                break;
            }
            logdet = pt.logdet;
            const VectorXd& d = pt.scaled_psi;
            const double mean = w.dot(d);
            const double gap = d.maxCoeff() - mean;
            // Relative to the psi scale when psi is small (large random effects).
            if (gap <= target_ * std::min(1.0, mean)) {
                break;
            }

            double face_hi = -kInf;
            double face_lo = kInf;
            double outside = -kInf;
            Eigen::Index outside_at = -1;
            for (Eigen::Index j = 0; j < w.size(); ++j) {
                if (w[j] > 0.0) {
                    face_hi = std::max(face_hi, d[j]);
                    face_lo = std::min(face_lo, d[j]);
                } else if (d[j] > outside) {
                    outside = d[j];
                    outside_at = j;
                }
            }

            const double before = logdet;
            const VectorXd w_before = w;
            if (outside_at >= 0 && outside - mean > target_ && outside - mean >= face_hi - face_lo) {
                // Admit the violator into the face; fall back to a vertex step.
                logdet = face_step(w, pt, outside_at);
                if (!(logdet > before)) {
                    logdet = vertex_step(w, outside_at, pt.logdet);
                }
            } else {
                logdet = face_step(w, pt, -1);
            }
            if (logdet <= before && (w - w_before).lpNorm<Eigen::Infinity>() < 1e-15) {
                if (++stalls >= 3) {
                    break;
                }
            } else {
                stalls = 0;
            }
        }

        out.weights = w;
        out.logdet = eval_.log_det(w);
        out.iterations = it;
        return out;
    }

private:
    // w <- (1 - l) w + l e_j with l maximizing the criterion on [0, 1].
    double vertex_step(VectorXd& w, Eigen::Index j, double current) const {
        const VectorXd base = w;
        const auto along = [&](double lambda) {
            VectorXd trial = (1.0 - lambda) * base;
            trial[j] += lambda;
            return eval_.log_det(trial);
        };
        const LineMax best = golden_max(along, 0.0, 1.0, current);
        if (best.arg > 0.0 && best.value > current) {
            w = (1.0 - best.arg) * base;
            w[j] += best.arg;
            renormalize(w);
            return best.value;
        }
        return current;
    }

    // Newton (or projected-gradient) step restricted to the current support.
    // `extra` (if >= 0) joins the face at zero weight.
    double face_step(VectorXd& w, const CriterionEvaluator::Point& pt, Eigen::Index extra) const {
        std::vector<Eigen::Index> face;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            if (w[j] > 0.0 || j == extra) {
                face.push_back(j);
            }
        }
        const auto n = static_cast<Eigen::Index>(face.size());
        VectorXd g(n);
        MatrixXd kkt = MatrixXd::Zero(n + 1, n + 1);
        for (Eigen::Index a = 0; a < n; ++a) {
            g[a] = pt.gradient[face[a]];
            for (Eigen::Index b = 0; b < n; ++b) {
                kkt(a, b) = pt.hessian(face[a], face[b]);
            }
            kkt(a, n) = 1.0;
            kkt(n, a) = 1.0;
        }
        // Centring keeps the multiplier near zero, so the tiny directions met
        // close to the optimum are not lost to its rounding error.
        g.array() -= g.mean();
        VectorXd rhs = VectorXd::Zero(n + 1);
        rhs.head(n) = -g;
        const Eigen::FullPivLU<MatrixXd> lu(kkt);
        VectorXd dir = VectorXd::Zero(n);
        bool newton = false;
        if (lu.isInvertible()) {
            dir = lu.solve(rhs).head(n);
            dir.array() -= dir.mean();
            newton = dir.allFinite() && g.dot(dir) > 0.0;
        }
        if (!newton) {
            if (extra >= 0) {
                return pt.logdet;
            }
            dir = g;
        }
        if (!(dir.lpNorm<Eigen::Infinity>() > 0.0)) {
            return pt.logdet;
        }

        // Largest step keeping the face weights nonnegative.
        double t_max = kInf;
        Eigen::Index blocking = -1;
        for (Eigen::Index a = 0; a < n; ++a) {
            if (dir[a] < 0.0) {
                const double t = -w[face[a]] / dir[a];
                if (t < t_max) {
                    t_max = t;
                    blocking = a;
                }
            }
        }

        const VectorXd base = w;
        const auto moved = [&](double t) {
            VectorXd trial = base;
            for (Eigen::Index a = 0; a < n; ++a) {
                trial[face[a]] += t * dir[a];
            }
            if (blocking >= 0 && t >= t_max) {
                trial[face[blocking]] = 0.0;
            }
            return trial;
        };
        const auto value_at = [&](double t) {
            VectorXd trial = moved(t);
            renormalize(trial);
            return eval_.log_det(trial);
        };

        double step = 0.0;
        double value = pt.logdet;
        if (newton && g.dot(dir) < 1e-11 * std::max(1.0, std::abs(pt.logdet))) {
            // The predicted gain is below the resolution of log det, so judge
            // the full step by the spread of I psi instead of by value.
            const double t = std::min(1.0, t_max);
            VectorXd trial = moved(t);
            renormalize(trial);
            const auto next = eval_.evaluate(trial, CriterionEvaluator::Detail::Gradient);
            if (!next.singular && spread(trial, next.scaled_psi) < spread(base, pt.scaled_psi)) {
                w = trial;
                return next.logdet;
            }
            return pt.logdet;
        }
        if (newton) {
            const double slack = 1e-14 * std::max(1.0, std::abs(pt.logdet));
            double t = std::min(1.0, t_max);
            for (int halving = 0; halving < 40; ++halving) {
                const double v = value_at(t);
                if (v >= pt.logdet - slack) {
                    step = t;
                    value = v;
                    break;
                }
                t *= 0.5;
            }
        } else {
            const double hi = std::isfinite(t_max) ? t_max : 1.0 / dir.lpNorm<Eigen::Infinity>();
            const LineMax best = golden_max(value_at, 0.0, hi, pt.logdet);
            step = best.arg;
            value = best.value;
        }
        if (step <= 0.0) {
            return pt.logdet;
        }
        w = moved(step);
        renormalize(w);
        return value;
    }

    // Largest I psi_j minus the smallest on the support; zero at the optimum.
    static double spread(const VectorXd& w, const VectorXd& d) {
        double lo = kInf;
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            if (w[j] > 0.0) {
                lo = std::min(lo, d[j]);
            }
        }
        return d.maxCoeff() - lo;
    }

    const CriterionEvaluator& eval_;
    const SolverOptions& opts_;
    double target_;
};

// Dirichlet(1, ..., 1) draw from raw 64-bit output, independent of the
// standard library's distribution implementations.
VectorXd dirichlet_start(std::mt19937_64& rng, int J) {
    VectorXd w(J);
    for (int j = 0; j < J; ++j) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        w[j] = -std::log1p(-u) + 1e-12;
    }
    return w / w.sum();
}

double binomial(long long n, long long k) {
    if (k < 0 || k > n) {
        return 0.0;
    }
    double r = 1.0;
    for (long long i = 1; i <= k; ++i) {
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// Problem validation
// ---------------------------------------------------------------------------

CriterionEvaluator DesignProblem::evaluator() const {
    return make_evaluator(model, spec, time_points, total_items);
}

void validate(const DesignProblem& problem) {
    if (problem.time_points < 1 || problem.time_points > kMaxTimePoints) {
        throw Error(ErrorCode::Parameter, "number of time points must be in [1, " +
                                              std::to_string(kMaxTimePoints) + "]");
    }
    validate(problem.model, TimeGrid(problem.time_points));
    validate(problem.spec);
    if (!(problem.total_items > 0.0) || !std::isfinite(problem.total_items)) {
        throw Error(ErrorCode::Parameter, "item budget must be positive");
    }
}

void validate(const SolverOptions& opts) {
    if (opts.max_iters < 1) {
        throw Error(ErrorCode::Parameter, "max_iters must be at least 1");
    }
    if (!(opts.gap_tol > 0.0)) {
        throw Error(ErrorCode::Parameter, "gap_tol must be positive");
    }
    if (opts.restarts < 0) {
        throw Error(ErrorCode::Parameter, "restarts must be nonnegative");
    }
}

// ---------------------------------------------------------------------------
// Numerical solver
// ---------------------------------------------------------------------------

SolveResult solve_numeric(const DesignProblem& problem, const SolverOptions& opts) {
    validate(problem);
    validate(opts);
    const CriterionEvaluator eval = problem.evaluator();
    const int J = problem.time_points;
    if (!check_estimable(eval.jacobian(), VectorXd::Ones(J))) {
        throw Error(ErrorCode::Infeasible, "no design makes the parameters estimable");
    }

    const Ascender ascender(eval, opts);
    std::mt19937_64 rng(opts.seed);
    Ascent best;
    int best_start = -1;
    int iterations = 0;
    for (int start = 0; start <= opts.restarts; ++start) {
        const VectorXd w0 = start == 0 ? VectorXd::Constant(J, 1.0 / J).eval()
                                       : dirichlet_start(rng, J);
        Ascent run = ascender.run(w0);
        iterations += run.iterations;
        if (best_start < 0 || run.logdet > best.logdet) {
            best = std::move(run);
            best_start = start;
        }
    }

    // Structural zeros: clamp, renormalize, then certify the clamped design.
    VectorXd w = best.weights;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        if (w[j] < kZeroClamp) {
            w[j] = 0.0;
        }
    }
    w /= w.sum();

    OptimalityCertificate cert = certify(eval, w, opts.gap_tol);
    const double criterion = eval.log_det(w);
    const bool converged = cert.optimal;
    return SolveResult{DesignWeights(w, problem.total_items), std::move(cert), criterion,
                       converged, iterations, best_start};
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

DesignWeights solve_ratio_closed_form(double a, double rho, double total_items) {
    if (!(a >= 0.0) || !(rho >= 0.0 && rho <= 1.0)) {
        throw Error(ErrorCode::Parameter, "ratio closed form needs a >= 0 and rho in [0, 1]");
    }
    VectorXd w(2);
    if (a * rho > 1.0) {
        w[1] = (a + 1.0) / (a + a * rho);
        w[0] = (a * rho - 1.0) / (a + a * rho);
    } else {
        w << 0.0, 1.0;
    }
    return DesignWeights::normalized(w, total_items);
}

namespace {

// Bisection for the root of f on [lo, hi] assuming f(lo) > 0 > f(hi).
double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double f_lo = f(lo);
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = f(mid);
        if (f_mid == 0.0) {
            return mid;
        }
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

int count_sign_changes(const std::function<double(double)>& f, double lo, double hi) {
    constexpr int kScan = 2000;
    int changes = 0;
    double prev = f(lo);
    for (int i = 1; i <= kScan; ++i) {
        const double x = lo + (hi - lo) * i / kScan;
        const double v = f(x);
        if ((v > 0.0 && prev < 0.0) || (v < 0.0 && prev > 0.0)) {
            ++changes;
        }
        if (v != 0.0) {
            prev = v;
        }
    }
    return changes;
}

CubicRoot root_on_half_interval(const std::function<double(double)>& f, double fallback) {
    constexpr double kLo = 1e-9;
    constexpr double kHi = 0.5;
    CubicRoot root;
    root.sign_changes = count_sign_changes(f, kLo, kHi);
    const double f_lo = f(kLo);
    const double f_hi = f(kHi);
    if (f_hi == 0.0) {
        root.weight = kHi;
    } else if ((f_lo > 0.0 && f_hi < 0.0) || (f_lo < 0.0 && f_hi > 0.0)) {
        root.weight = bisect(f, kLo, kHi);
    } else {
        root.weight = fallback;
    }
    return root;
}

}  // namespace

CubicRoot solve_line_j3_rho0(double a) {
    if (!(a >= 0.0)) {
        throw Error(ErrorCode::Parameter, "standardized variance ratio must be nonnegative");
    }
    if (a <= 2.0 * (std::sqrt(2.0) - 1.0)) {
        return CubicRoot{0.5, 0};
    }
    const auto cubic = [a](double w) {
        return 18.0 * a * a * w * w * w - (20.0 * a * a + 18.0 * a) * w * w +
               5.0 * (a * a + a) * w + a + 1.0;
    };
    return root_on_half_interval(cubic, 0.5);
}

CubicRoot solve_line_j3_ar1(double a, double rho) {
    if (!(a >= 0.0) || !(rho >= 0.0 && rho <= 1.0)) {
        throw Error(ErrorCode::Parameter, "AR(1) cubic needs a >= 0 and rho in [0, 1]");
    }
    const double r2 = rho * rho;
    const auto cubic = [a, r2](double w) {
        const double aa = a * a;
        return (aa * w * (1.0 - w) + a + 1.0) * (1.0 - 3.0 * w) -
               aa * r2 * w * (1.0 - 2.0 * w) * (1.0 - 2.0 * w) + aa * r2 * r2 * w * w * w;
    };
    return root_on_half_interval(cubic, 1.0 / 3.0);
}

// ---------------------------------------------------------------------------
// Brute-force lattice oracle
// ---------------------------------------------------------------------------

OracleResult brute_force_oracle(const DesignProblem& problem, double step, int max_support,
                                long long budget) {
    validate(problem);
    const int J = problem.time_points;
    if (J > 7) {
        throw Error(ErrorCode::Resource, "lattice oracle supports at most 7 time points");
    }
    if (!(step > 0.0 && step <= 1.0)) {
        throw Error(ErrorCode::Parameter, "lattice step must lie in (0, 1]");
    }
    const long long units = std::llround(1.0 / step);
    if (std::abs(static_cast<double>(units) * step - 1.0) > 1e-9) {
        throw Error(ErrorCode::Parameter, "lattice step must divide one");
    }
    max_support = std::clamp(max_support, 1, J);
    const int p = problem.parameters();

    double planned = 0.0;
    for (int k = std::max(1, p); k <= max_support; ++k) {
        planned += binomial(J, k) * binomial(units - 1, k - 1);
    }
    if (planned > static_cast<double>(budget)) {
        throw Error(ErrorCode::Resource, "lattice has " + std::to_string(planned) +
                                             " points, budget is " + std::to_string(budget));
    }

    const CriterionEvaluator eval = problem.evaluator();
    VectorXd best_w = VectorXd::Constant(J, 1.0 / J);
    double best_value = -kInf;
    long long evaluated = 0;

    std::vector<int> support;
    std::vector<long long> parts;
    VectorXd w(J);

    // Compositions of `units` into exactly support.size() positive parts.
    std::function<void(std::size_t, long long)> compose = [&](std::size_t idx, long long left) {
        if (idx + 1 == support.size()) {
            parts[idx] = left;
            w.setZero();
            for (std::size_t s = 0; s < support.size(); ++s) {
                w[support[s]] = static_cast<double>(parts[s]) / static_cast<double>(units);
            }
            ++evaluated;
            const double v = eval.log_det(w);
            if (v > best_value) {
                best_value = v;
                best_w = w;
            }
            return;
        }
        const long long remaining_slots = static_cast<long long>(support.size() - idx - 1);
        for (long long c = 1; c <= left - remaining_slots; ++c) {
            parts[idx] = c;
            compose(idx + 1, left - c);
        }
    };

    for (unsigned mask = 1; mask < (1u << J); ++mask) {
        const int k = __builtin_popcount(mask);
        if (k < p || k > max_support || k > units) {
            continue;
        }
        support.clear();
        for (int j = 0; j < J; ++j) {
            if (mask & (1u << j)) {
                support.push_back(j);
            }
        }
        VectorXd indicator = VectorXd::Zero(J);
        for (int j : support) {
            indicator[j] = 1.0;
        }
        if (!check_estimable(eval.jacobian(), indicator)) {
            continue;
        }
        parts.assign(support.size(), 0);
        compose(0, units);
    }
    if (!std::isfinite(best_value)) {
        throw Error(ErrorCode::Infeasible, "no estimable lattice design");
    }
    return OracleResult{DesignWeights::normalized(best_w, problem.total_items), best_value,
                        evaluated};
}

// ---------------------------------------------------------------------------
// Rounding to exact designs
// ---------------------------------------------------------------------------

ExactDesignLayout round_exact(const DesignWeights& design, int total_items,
                              const DesignProblem& problem) {
    validate(problem);
    const int J = problem.time_points;
    if (design.size() != J) {
        throw Error(ErrorCode::Parameter, "design size does not match the problem");
    }
    const VectorXd& w = design.weights();
    const int support = design.support_size(kSupportThreshold);
    if (total_items < support || total_items < 1) {
        throw Error(ErrorCode::Infeasible, "fewer items than support points");
    }

    ExactDesignLayout layout;
    layout.counts.assign(J, 0);

    const bool saturated = problem.parameters() == J;
    const bool exchangeable = problem.spec.kind == CovarianceKind::CompoundSymmetry;
    const bool uniform = (w.array() - 1.0 / J).abs().maxCoeff() <= 1e-8;
    if (saturated && exchangeable && uniform) {
        const int base = total_items / J;
        const int extra = total_items % J;
        for (int j = 0; j < J; ++j) {
            layout.counts[j] = base + (j < extra ? 1 : 0);
        }
        return layout;
    }

    // Largest remainder with at least one item per support point.
    const VectorXd target = static_cast<double>(total_items) * w;
    for (int j = 0; j < J; ++j) {
        if (w[j] > kSupportThreshold) {
            layout.counts[j] = std::max(1, static_cast<int>(std::floor(target[j])));
        }
    }
    int allocated = layout.total();
    while (allocated < total_items) {
        int pick = -1;
        for (int j = 0; j < J; ++j) {
            if (w[j] > kSupportThreshold &&
                (pick < 0 || target[j] - layout.counts[j] > target[pick] - layout.counts[pick])) {
                pick = j;
            }
        }
        ++layout.counts[pick];
        ++allocated;
    }
    while (allocated > total_items) {
        int pick = -1;
        for (int j = 0; j < J; ++j) {
            if (layout.counts[j] > 1 &&
                (pick < 0 || target[j] - layout.counts[j] < target[pick] - layout.counts[pick])) {
                pick = j;
            }
        }
        --layout.counts[pick];
        --allocated;
    }

    // Greedy single-item moves under the exact criterion.
    const CriterionEvaluator eval = make_evaluator(problem.model, problem.spec, J, total_items);
    const auto value_of = [&](const std::vector<int>& counts) {
        VectorXd cw(J);
        for (int j = 0; j < J; ++j) {
            cw[j] = static_cast<double>(counts[j]) / total_items;
        }
        return eval.log_det(cw);
    };
    double current = value_of(layout.counts);
    for (;;) {
        double best = current;
        int from = -1;
        int to = -1;
        for (int i = 0; i < J; ++i) {
            if (layout.counts[i] == 0) {
                continue;
            }
            for (int k = 0; k < J; ++k) {
                if (k == i) {
                    continue;
                }
                --layout.counts[i];
                ++layout.counts[k];
                const double v = value_of(layout.counts);
                ++layout.counts[i];
                --layout.counts[k];
                if (v > best + 1e-12 * (1.0 + std::abs(best))) {
                    best = v;
                    from = i;
                    to = k;
                }
            }
        }
        if (from < 0) {
            break;
        }
        --layout.counts[from];
        ++layout.counts[to];
        current = best;
    }
    return layout;
}

}  // namespace growthdesign
