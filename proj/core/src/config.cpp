#include "growthdesign/config.hpp"

#include "growthdesign/error.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace growthdesign {

std::string_view to_string(RunMode mode) noexcept {
    switch (mode) {
        case RunMode::Solve: return "solve";
        case RunMode::Certify: return "certify";
        case RunMode::Efficiency: return "efficiency";
        case RunMode::Sweep: return "sweep";
        case RunMode::FigureData: return "figure-data";
    }
    return "unknown";
}

std::optional<RunMode> parse_run_mode(std::string_view name) {
    if (name == "solve") return RunMode::Solve;
    if (name == "certify") return RunMode::Certify;
    if (name == "efficiency") return RunMode::Efficiency;
    if (name == "sweep") return RunMode::Sweep;
    if (name == "figure-data") return RunMode::FigureData;
    return std::nullopt;
}

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw Error(ErrorCode::Schema, path + ": " + what);
}

std::string child(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string element(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

void reject_unknown_keys(const YAML::Node& node, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            schema_error(child(path, key), "unknown key");
        }
    }
}

YAML::Node require(const YAML::Node& node, const std::string& key, const std::string& path) {
    const YAML::Node value = node[key];
    if (!value) {
        schema_error(child(path, key), "missing required field");
    }
    return value;
}

double as_number(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
        schema_error(path, "expected a number");
    }
    try {
        return node.as<double>();
    } catch (const YAML::Exception&) {
        schema_error(path, "expected a number, got '" + node.Scalar() + "'");
    }
}

long long as_integer(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
        schema_error(path, "expected an integer");
    }
    try {
        return node.as<long long>();
    } catch (const YAML::Exception&) {
        schema_error(path, "expected an integer, got '" + node.Scalar() + "'");
    }
}

std::string as_text(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
        schema_error(path, "expected a string");
    }
    return node.Scalar();
}

std::vector<double> as_numbers(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence()) {
        schema_error(path, "expected a list of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        out.push_back(as_number(node[i], element(path, i)));
    }
    return out;
}

VectorXd as_vector(const YAML::Node& node, const std::string& path) {
    const auto values = as_numbers(node, path);
    return Eigen::Map<const VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

CurveFamily as_family(const YAML::Node& node, const std::string& path) {
    const auto name = as_text(node, path);
    const auto family = parse_curve_family(name);
    if (!family) {
        schema_error(path, "unknown growth-curve family '" + name + "'");
    }
    return *family;
}

CovarianceKind as_kind(const YAML::Node& node, const std::string& path) {
    const auto name = as_text(node, path);
    const auto kind = parse_covariance_kind(name);
    if (!kind) {
        schema_error(path, "unknown covariance kind '" + name + "'");
    }
    return *kind;
}

void parse_problem(const YAML::Node& node, const std::string& path, ScenarioConfig& cfg,
                   bool needs_model) {
    if (!node.IsMap()) {
        schema_error(path, "expected a mapping");
    }
    reject_unknown_keys(node, path, {"time_points", "total_items", "model", "covariance"});
    const auto j_path = child(path, "time_points");
    const long long J = as_integer(require(node, "time_points", path), j_path);
    if (J < 1 || J > kMaxTimePoints) {
        schema_error(j_path, "must be between 1 and " + std::to_string(kMaxTimePoints));
    }
    cfg.problem.time_points = static_cast<int>(J);
    const auto i_path = child(path, "total_items");
    cfg.problem.total_items = as_number(require(node, "total_items", path), i_path);
    if (!(cfg.problem.total_items > 0.0)) {
        schema_error(i_path, "must be positive");
    }

    const auto m_path = child(path, "model");
    if (const YAML::Node model = node["model"]) {
        reject_unknown_keys(model, m_path, {"family", "beta"});
        cfg.problem.model.family =
            as_family(require(model, "family", m_path), child(m_path, "family"));
        cfg.problem.model.beta =
            as_vector(require(model, "beta", m_path), child(m_path, "beta"));
    } else if (needs_model) {
        schema_error(m_path, "missing required field");
    }

    const auto c_path = child(path, "covariance");
    if (const YAML::Node cov = node["covariance"]) {
        reject_unknown_keys(cov, c_path, {"kind", "sigma_gamma_sq", "rho", "sigma_eps_sq"});
        if (cov["kind"]) {
            cfg.problem.spec.kind = as_kind(cov["kind"], child(c_path, "kind"));
        } else if (needs_model) {
            schema_error(child(c_path, "kind"), "missing required field");
        }
        if (cov["sigma_gamma_sq"]) {
            cfg.problem.spec.sigma_gamma_sq =
                as_number(cov["sigma_gamma_sq"], child(c_path, "sigma_gamma_sq"));
        } else if (needs_model) {
            schema_error(child(c_path, "sigma_gamma_sq"), "missing required field");
        }
        if (cov["rho"]) {
            cfg.problem.spec.rho = as_number(cov["rho"], child(c_path, "rho"));
        } else if (needs_model) {
            schema_error(child(c_path, "rho"), "missing required field");
        }
        if (cov["sigma_eps_sq"]) {
            cfg.problem.spec.sigma_eps_sq =
                as_number(cov["sigma_eps_sq"], child(c_path, "sigma_eps_sq"));
        }
    } else if (needs_model) {
        schema_error(c_path, "missing required field");
    }
}

VectorXd parse_design(const YAML::Node& node, const std::string& path) {
    reject_unknown_keys(node, path, {"weights", "counts"});
    if (node["weights"] && node["counts"]) {
        schema_error(path, "give either weights or counts, not both");
    }
    VectorXd raw;
    if (node["weights"]) {
        raw = as_vector(node["weights"], child(path, "weights"));
        const double sum = raw.sum();
        if (std::abs(sum - 1.0) > 1e-6) {
            schema_error(child(path, "weights"), "must sum to one (within 1e-6)");
        }
    } else if (node["counts"]) {
        raw = as_vector(node["counts"], child(path, "counts"));
    } else {
        schema_error(path, "expected weights or counts");
    }
    if ((raw.array() < 0.0).any() || !(raw.sum() > 0.0)) {
        schema_error(path, "design values must be nonnegative with a positive sum");
    }
    return raw / raw.sum();
}

void parse_sweep(const YAML::Node& node, const std::string& path, SweepAxes& axes) {
    reject_unknown_keys(node, path,
                        {"models", "covariance_kinds", "sigma_gamma_sq", "a", "rho"});
    const auto models_path = child(path, "models");
    const YAML::Node models = require(node, "models", path);
    if (!models.IsSequence() || models.size() == 0) {
        schema_error(models_path, "expected a nonempty list");
    }
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto m_path = element(models_path, i);
        reject_unknown_keys(models[i], m_path, {"family", "beta"});
        ModelAxis axis;
        axis.family = as_family(require(models[i], "family", m_path), child(m_path, "family"));
        const auto b_path = child(m_path, "beta");
        const YAML::Node beta = require(models[i], "beta", m_path);
        if (!beta.IsSequence()) {
            schema_error(b_path, "expected one list of values per beta component");
        }
        for (std::size_t k = 0; k < beta.size(); ++k) {
            const auto values = beta[k].IsSequence()
                                    ? as_numbers(beta[k], element(b_path, k))
                                    : std::vector<double>{as_number(beta[k], element(b_path, k))};
            if (values.empty()) {
                schema_error(element(b_path, k), "axis must not be empty");
            }
            axis.beta_axes.push_back(values);
        }
        axes.models.push_back(std::move(axis));
    }

    const auto k_path = child(path, "covariance_kinds");
    const YAML::Node kinds = require(node, "covariance_kinds", path);
    if (!kinds.IsSequence() || kinds.size() == 0) {
        schema_error(k_path, "expected a nonempty list");
    }
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        axes.kinds.push_back(as_kind(kinds[i], element(k_path, i)));
    }

    if (node["sigma_gamma_sq"] && node["a"]) {
        schema_error(path, "give either sigma_gamma_sq or a, not both");
    }
    if (node["sigma_gamma_sq"]) {
        axes.sigma_gamma_sq = as_numbers(node["sigma_gamma_sq"], child(path, "sigma_gamma_sq"));
    } else if (node["a"]) {
        axes.standardized_ratio = as_numbers(node["a"], child(path, "a"));
    } else {
        schema_error(child(path, "sigma_gamma_sq"), "missing required field (or give a)");
    }
    axes.rho = as_numbers(require(node, "rho", path), child(path, "rho"));
}

}  // namespace

ScenarioConfig parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::Schema, std::string("config: ") + e.what());
    }
    if (!root.IsMap()) {
        schema_error("config", "expected a mapping at the top level");
    }
    reject_unknown_keys(root, "", {"version", "mode", "problem", "design", "reference", "sweep",
                                   "solver", "output", "figure", "jobs"});

    ScenarioConfig cfg;
    const long long version = as_integer(require(root, "version", ""), "version");
    if (version != kConfigVersion) {
        schema_error("version", "unsupported config version " + std::to_string(version));
    }
    cfg.version = static_cast<int>(version);

    const auto mode_name = as_text(require(root, "mode", ""), "mode");
    const auto mode = parse_run_mode(mode_name);
    if (!mode) {
        schema_error("mode", "unknown mode '" + mode_name + "'");
    }
    cfg.mode = *mode;
    const bool grid = cfg.mode == RunMode::Sweep || cfg.mode == RunMode::FigureData;

    parse_problem(require(root, "problem", ""), "problem", cfg, !grid);

    if (const YAML::Node design = root["design"]) {
        cfg.design = parse_design(design, "design");
    }
    if (const YAML::Node ref = root["reference"]) {
        reject_unknown_keys(ref, "reference", {"type", "weights", "counts"});
        const auto type = as_text(require(ref, "type", "reference"), "reference.type");
        if (type == "optimal") {
            cfg.reference_kind = ReferenceKind::Optimal;
        } else if (type == "closed-form") {
            cfg.reference_kind = ReferenceKind::ClosedForm;
        } else if (type == "design") {
            cfg.reference_kind = ReferenceKind::Weights;
            YAML::Node values;
            if (ref["weights"]) values["weights"] = ref["weights"];
            if (ref["counts"]) values["counts"] = ref["counts"];
            cfg.reference = parse_design(values, "reference");
        } else {
            schema_error("reference.type", "expected optimal, closed-form or design");
        }
    }
    if (const YAML::Node sweep = root["sweep"]) {
        parse_sweep(sweep, "sweep", cfg.sweep);
    }
    if (const YAML::Node solver = root["solver"]) {
        reject_unknown_keys(solver, "solver", {"max_iters", "gap_tol", "restarts", "seed"});
        if (solver["max_iters"]) {
            cfg.solver.max_iters =
                static_cast<int>(as_integer(solver["max_iters"], "solver.max_iters"));
        }
        if (solver["gap_tol"]) {
            cfg.solver.gap_tol = as_number(solver["gap_tol"], "solver.gap_tol");
        }
        if (solver["restarts"]) {
            cfg.solver.restarts =
                static_cast<int>(as_integer(solver["restarts"], "solver.restarts"));
        }
        if (solver["seed"]) {
            cfg.solver.seed = static_cast<std::uint64_t>(as_integer(solver["seed"], "solver.seed"));
        }
    }
    if (const YAML::Node output = root["output"]) {
        reject_unknown_keys(output, "output", {"dir"});
        if (output["dir"]) {
            cfg.out_dir = as_text(output["dir"], "output.dir");
        }
    }
    if (const YAML::Node figure = root["figure"]) {
        reject_unknown_keys(figure, "figure", {"kind"});
        cfg.figure_kind = as_text(require(figure, "kind", "figure"), "figure.kind");
    }
    if (root["jobs"]) {
        cfg.jobs = static_cast<int>(as_integer(root["jobs"], "jobs"));
    }
    validate(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Usage, "cannot read config file " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

void validate(const ScenarioConfig& cfg) {
    const auto wrap = [](const std::string& path, auto&& check) {
        try {
            check();
        } catch (const Error& e) {
            if (e.code() == ErrorCode::Schema) {
                throw;
            }
            schema_error(path, e.what());
        }
    };
    if (cfg.version != kConfigVersion) {
        schema_error("version", "unsupported config version");
    }
    wrap("solver", [&] { validate(cfg.solver); });
    if (cfg.jobs < 0) {
        schema_error("jobs", "must be nonnegative");
    }

    const bool grid = cfg.mode == RunMode::Sweep || cfg.mode == RunMode::FigureData;
    if (!grid) {
        wrap("problem", [&] { validate(cfg.problem); });
        const int J = cfg.problem.time_points;
        if (cfg.mode == RunMode::Certify || cfg.mode == RunMode::Efficiency) {
            if (!cfg.design) {
                schema_error("design", "missing required section for " +
                                           std::string(to_string(cfg.mode)) + " mode");
            }
            if (cfg.design->size() != J) {
                schema_error("design", "must have one entry per time point");
            }
        }
        if (cfg.mode == RunMode::Efficiency && cfg.reference_kind == ReferenceKind::Weights &&
            (!cfg.reference || cfg.reference->size() != J)) {
            schema_error("reference", "must list one weight per time point");
        }
        return;
    }

    if (cfg.mode == RunMode::FigureData && cfg.figure_kind.empty()) {
        schema_error("figure.kind", "missing required field for figure-data mode");
    }
    wrap("problem.covariance.sigma_eps_sq", [&] {
        CovarianceSpec probe = cfg.problem.spec;
        probe.sigma_gamma_sq = 0.0;
        probe.rho = 0.0;
        validate(probe);
    });
    const auto& axes = cfg.sweep;
    if (axes.models.empty()) {
        schema_error("sweep.models", "sweep axes must not be empty");
    }
    if (axes.kinds.empty()) {
        schema_error("sweep.covariance_kinds", "sweep axes must not be empty");
    }
    if (axes.rho.empty()) {
        schema_error("sweep.rho", "sweep axes must not be empty");
    }
    if (axes.sigma_gamma_sq.empty() && axes.standardized_ratio.empty()) {
        schema_error("sweep.sigma_gamma_sq", "sweep axes must not be empty");
    }
    for (std::size_t i = 0; i < axes.rho.size(); ++i) {
        if (!(axes.rho[i] >= 0.0 && axes.rho[i] <= 1.0)) {
            schema_error("sweep.rho[" + std::to_string(i) + "]", "must lie in [0, 1]");
        }
    }
    for (std::size_t i = 0; i < axes.sigma_gamma_sq.size(); ++i) {
        if (!(axes.sigma_gamma_sq[i] >= 0.0)) {
            schema_error("sweep.sigma_gamma_sq[" + std::to_string(i) + "]", "must be nonnegative");
        }
    }
    for (std::size_t i = 0; i < axes.standardized_ratio.size(); ++i) {
        if (!(axes.standardized_ratio[i] >= 0.0)) {
            schema_error("sweep.a[" + std::to_string(i) + "]", "must be nonnegative");
        }
    }
    for (std::size_t m = 0; m < axes.models.size(); ++m) {
        const auto& axis = axes.models[m];
        const auto path = "sweep.models[" + std::to_string(m) + "].beta";
        const int p = parameter_count(axis.family, cfg.problem.time_points);
        if (static_cast<int>(axis.beta_axes.size()) != p) {
            schema_error(path, "expected " + std::to_string(p) + " beta components");
        }
        if (p > cfg.problem.time_points) {
            schema_error(path, "model has more parameters than time points");
        }
    }
}

ScenarioConfig table1_preset() {
    ScenarioConfig cfg;
    cfg.mode = RunMode::Sweep;
    cfg.problem.time_points = 7;
    cfg.problem.total_items = 100.0;
    cfg.problem.spec.sigma_eps_sq = 1.0;

    const std::vector<double> beta0{0.0};
    const std::vector<double> beta1{1.0, 3.0, 5.0, 10.0};
    const std::vector<double> beta2{0.5, 1.0, 2.0};
    const std::vector<double> beta3{-2.0, -1.0, 0.0, 1.0, 2.0};
    cfg.sweep.models = {
        ModelAxis{CurveFamily::Exponential, {beta0, beta1, beta2}},
        ModelAxis{CurveFamily::Logistic, {beta0, beta1, beta2, beta3}},
    };
    cfg.sweep.kinds = {CovarianceKind::CompoundSymmetry, CovarianceKind::AR1};
    for (int k = 0; k <= 19; ++k) {
        cfg.sweep.rho.push_back(k / 20.0);
    }
    for (int k = 0; k <= 20; ++k) {
        cfg.sweep.sigma_gamma_sq.push_back(k / 10.0);
    }
    cfg.sweep.sigma_gamma_sq.insert(cfg.sweep.sigma_gamma_sq.end(), {2.5, 5.0, 10.0});
    // Concavity makes the optimum global; the uniform start alone suffices here
    // and the certificate confirms every cell.
    cfg.solver.restarts = 0;
    return cfg;
}

std::optional<ScenarioConfig> preset(std::string_view name) {
    if (name == "paper-table1") {
        return table1_preset();
    }
    return std::nullopt;
}

}  // namespace growthdesign
