#include "growthdesign/report.hpp"

#include "growthdesign/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

namespace growthdesign {

using nlohmann::json;

DesignProblem CellInputs::problem() const {
    DesignProblem out;
    out.time_points = time_points;
    out.total_items = total_items;
    out.model.family = family;
    out.model.beta = Eigen::Map<const VectorXd>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    out.spec = CovarianceSpec{kind, sigma_gamma_sq, rho, sigma_eps_sq};
    return out;
}

CellInputs CellInputs::from(const DesignProblem& problem) {
    CellInputs in;
    in.family = problem.model.family;
    in.beta.assign(problem.model.beta.data(), problem.model.beta.data() + problem.model.beta.size());
    in.kind = problem.spec.kind;
    in.sigma_gamma_sq = problem.spec.sigma_gamma_sq;
    in.rho = problem.spec.rho;
    in.sigma_eps_sq = problem.spec.sigma_eps_sq;
    in.time_points = problem.time_points;
    in.total_items = problem.total_items;
    return in;
}

std::string format_number(double value) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc{}) {
        throw Error(ErrorCode::Resource, "number formatting failed");
    }
    return std::string(buf.data(), end);
}

// ---------------------------------------------------------------------------
// Summary

std::optional<GroupSummary> RunSummary::find(std::string_view family,
                                             std::string_view kind) const {
    for (const auto& g : groups) {
        if (g.family == family && g.kind == kind) {
            return g;
        }
    }
    return std::nullopt;
}

RunSummary summarize(const std::vector<CellRecord>& cells) {
    std::vector<std::pair<std::string, std::string>> keys{{"", ""}};
    const auto add_key = [&](std::string f, std::string k) {
        const std::pair<std::string, std::string> key{std::move(f), std::move(k)};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            keys.push_back(key);
        }
    };
    for (const auto& c : cells) {
        add_key(std::string(to_string(c.inputs.family)), "");
    }
    for (const auto& c : cells) {
        add_key("", std::string(to_string(c.inputs.kind)));
    }
    for (const auto& c : cells) {
        add_key(std::string(to_string(c.inputs.family)), std::string(to_string(c.inputs.kind)));
    }

    RunSummary summary;
    for (const auto& [family, kind] : keys) {
        GroupSummary g;
        g.family = family;
        g.kind = kind;
        double sum = 0.0;
        std::size_t ok = 0;
        double lowest = std::numeric_limits<double>::infinity();
        for (const auto& c : cells) {
            if ((!family.empty() && to_string(c.inputs.family) != family) ||
                (!kind.empty() && to_string(c.inputs.kind) != kind)) {
                continue;
            }
            ++g.cells;
            if (!c.ok()) {
                ++g.failures;
                continue;
            }
            if (!c.converged) ++g.not_converged;
            if (!c.optimal) ++g.not_optimal;
            ++ok;
            sum += c.uniform_efficiency;
            lowest = std::min(lowest, c.uniform_efficiency);
        }
        if (ok > 0) {
            g.min_uniform_efficiency = lowest;
            g.mean_uniform_efficiency = sum / static_cast<double>(ok);
        }
        summary.groups.push_back(std::move(g));
    }
    return summary;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json number(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

double read_number(const json& j) {
    return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

json numbers(const std::vector<double>& values) {
    json out = json::array();
    for (double v : values) {
        out.push_back(number(v));
    }
    return out;
}

std::vector<double> read_numbers(const json& j) {
    std::vector<double> out;
    for (const auto& v : j) {
        out.push_back(read_number(v));
    }
    return out;
}

json inputs_json(const CellInputs& in) {
    return json{{"family", to_string(in.family)},
                {"beta", numbers(in.beta)},
                {"covariance", to_string(in.kind)},
                {"sigma_gamma_sq", in.sigma_gamma_sq},
                {"rho", in.rho},
                {"sigma_eps_sq", in.sigma_eps_sq},
                {"a", number(in.standardized_ratio())},
                {"time_points", in.time_points},
                {"total_items", in.total_items}};
}

CellInputs read_inputs(const json& j) {
    CellInputs in;
    const auto family = parse_curve_family(j.at("family").get<std::string>());
    const auto kind = parse_covariance_kind(j.at("covariance").get<std::string>());
    if (!family || !kind) {
        throw Error(ErrorCode::Schema, "report: unknown family or covariance kind");
    }
    in.family = *family;
    in.kind = *kind;
    in.beta = read_numbers(j.at("beta"));
    in.sigma_gamma_sq = j.at("sigma_gamma_sq").get<double>();
    in.rho = j.at("rho").get<double>();
    in.sigma_eps_sq = j.at("sigma_eps_sq").get<double>();
    in.time_points = j.at("time_points").get<int>();
    in.total_items = j.at("total_items").get<double>();
    return in;
}

json cell_json(const CellRecord& c) {
    json out{{"index", c.index},
             {"inputs", inputs_json(c.inputs)},
             {"status", c.status},
             {"message", c.message},
             {"weights", numbers(c.weights)},
             {"criterion", number(c.criterion)},
             {"certificate",
              {{"psi", numbers(c.psi)},
               {"scaled_psi", numbers(c.scaled_psi)},
               {"avg", number(c.avg)},
               {"gap", number(c.gap)},
               {"optimal", c.optimal},
               {"eff_lower_bound", number(c.eff_lower_bound)},
               {"violations", c.violations}}},
             {"converged", c.converged},
             {"iterations", c.iterations},
             {"uniform_efficiency", number(c.uniform_efficiency)},
             {"wall_ms", c.wall_ms}};
    if (c.reference_weights) {
        out["reference_weights"] = numbers(*c.reference_weights);
    }
    if (c.efficiency) {
        out["efficiency"] = number(*c.efficiency);
    }
    return out;
}

CellRecord read_cell(const json& j) {
    CellRecord c;
    c.index = j.at("index").get<std::size_t>();
    c.inputs = read_inputs(j.at("inputs"));
    c.status = j.at("status").get<std::string>();
    c.message = j.at("message").get<std::string>();
    c.weights = read_numbers(j.at("weights"));
    c.criterion = read_number(j.at("criterion"));
    const auto& cert = j.at("certificate");
    c.psi = read_numbers(cert.at("psi"));
    c.scaled_psi = read_numbers(cert.at("scaled_psi"));
    c.avg = read_number(cert.at("avg"));
    c.gap = read_number(cert.at("gap"));
    c.optimal = cert.at("optimal").get<bool>();
    c.eff_lower_bound = read_number(cert.at("eff_lower_bound"));
    c.violations = cert.at("violations").get<std::vector<int>>();
    c.converged = j.at("converged").get<bool>();
    c.iterations = j.at("iterations").get<int>();
    c.uniform_efficiency = read_number(j.at("uniform_efficiency"));
    c.wall_ms = j.at("wall_ms").get<double>();
    if (j.contains("reference_weights")) {
        c.reference_weights = read_numbers(j.at("reference_weights"));
    }
    if (j.contains("efficiency")) {
        c.efficiency = read_number(j.at("efficiency"));
    }
    return c;
}

json summary_json(const RunSummary& s) {
    json groups = json::array();
    for (const auto& g : s.groups) {
        groups.push_back({{"family", g.family.empty() ? json(nullptr) : json(g.family)},
                          {"covariance", g.kind.empty() ? json(nullptr) : json(g.kind)},
                          {"cells", g.cells},
                          {"failures", g.failures},
                          {"not_converged", g.not_converged},
                          {"not_optimal", g.not_optimal},
                          {"min_uniform_efficiency", g.min_uniform_efficiency},
                          {"mean_uniform_efficiency", g.mean_uniform_efficiency}});
    }
    return json{{"groups", groups}};
}

RunSummary read_summary(const json& j) {
    RunSummary s;
    for (const auto& g : j.at("groups")) {
        GroupSummary out;
        out.family = g.at("family").is_null() ? "" : g.at("family").get<std::string>();
        out.kind = g.at("covariance").is_null() ? "" : g.at("covariance").get<std::string>();
        out.cells = g.at("cells").get<std::size_t>();
        out.failures = g.at("failures").get<std::size_t>();
        out.not_converged = g.at("not_converged").get<std::size_t>();
        out.not_optimal = g.at("not_optimal").get<std::size_t>();
        out.min_uniform_efficiency = g.at("min_uniform_efficiency").get<double>();
        out.mean_uniform_efficiency = g.at("mean_uniform_efficiency").get<double>();
        s.groups.push_back(std::move(out));
    }
    return s;
}

}  // namespace

std::string to_json(const RunReport& report) {
    json cells = json::array();
    for (const auto& c : report.cells) {
        cells.push_back(cell_json(c));
    }
    const json out{{"version", report.version},
                   {"mode", report.mode},
                   {"cells", cells},
                   {"summary", summary_json(report.summary)}};
    return out.dump(2) + "\n";
}

std::string to_json(const RunSummary& summary) {
    return summary_json(summary).dump(2) + "\n";
}

RunReport report_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        RunReport report;
        report.version = j.at("version").get<int>();
        report.mode = j.at("mode").get<std::string>();
        for (const auto& c : j.at("cells")) {
            report.cells.push_back(read_cell(c));
        }
        report.summary = read_summary(j.at("summary"));
        return report;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Schema, std::string("report: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Tables

std::string Table::to_csv() const {
    std::string out;
    const auto write_row = [&out](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i > 0) out += ',';
            const auto& f = fields[i];
            if (f.find_first_of(",\"\r\n") == std::string::npos) {
                out += f;
                continue;
            }
            out += '"';
            for (char ch : f) {
                if (ch == '"') out += '"';
                out += ch;
            }
            out += '"';
        }
        out += "\r\n";
    };
    write_row(header);
    for (const auto& row : rows) {
        write_row(row);
    }
    return out;
}

namespace {

std::string join_numbers(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ';';
        out += format_number(values[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ';';
        out += std::to_string(values[i]);
    }
    return out;
}

}  // namespace

Table cells_table(const RunReport& report) {
    int J = 0;
    for (const auto& c : report.cells) {
        J = std::max(J, c.inputs.time_points);
    }
    Table t;
    t.header = {"index", "family", "beta", "covariance", "sigma_gamma_sq", "rho",
                "sigma_eps_sq", "a", "time_points", "total_items", "status", "message"};
    for (int j = 1; j <= J; ++j) {
        t.header.push_back("w_" + std::to_string(j));
    }
    for (const auto* name : {"criterion", "avg", "gap", "optimal", "eff_lower_bound",
                             "violations", "converged", "iterations", "uniform_efficiency",
                             "efficiency"}) {
        t.header.emplace_back(name);
    }
    for (const auto& c : report.cells) {
        std::vector<std::string> row{std::to_string(c.index),
                                     std::string(to_string(c.inputs.family)),
                                     join_numbers(c.inputs.beta),
                                     std::string(to_string(c.inputs.kind)),
                                     format_number(c.inputs.sigma_gamma_sq),
                                     format_number(c.inputs.rho),
                                     format_number(c.inputs.sigma_eps_sq),
                                     format_number(c.inputs.standardized_ratio()),
                                     std::to_string(c.inputs.time_points),
                                     format_number(c.inputs.total_items),
                                     c.status,
                                     c.message};
        for (int j = 0; j < J; ++j) {
            row.push_back(j < static_cast<int>(c.weights.size()) ? format_number(c.weights[j])
                                                                 : std::string());
        }
        if (c.ok()) {
            row.push_back(format_number(c.criterion));
            row.push_back(format_number(c.avg));
            row.push_back(format_number(c.gap));
            row.push_back(c.optimal ? "true" : "false");
            row.push_back(format_number(c.eff_lower_bound));
            row.push_back(join_ints(c.violations));
            row.push_back(c.converged ? "true" : "false");
            row.push_back(std::to_string(c.iterations));
            row.push_back(format_number(c.uniform_efficiency));
            row.push_back(c.efficiency ? format_number(*c.efficiency) : std::string());
        } else {
            row.resize(t.header.size());
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

const std::vector<std::string_view>& figure_kinds() {
    static const std::vector<std::string_view> kinds{
        "weight-vs-rho", "weight-vs-a", "efficiency-vs-a", "efficiency-vs-rho",
        "weights-per-time"};
    return kinds;
}

namespace {

enum class Axis { Rho, A };

// Cells grouped into series that differ only in the x axis, then sorted.
struct Ordered {
    std::vector<std::size_t> series;  // per ok cell, parallel to `cells`
    std::vector<const CellRecord*> cells;
};

Ordered order_by_series(const RunReport& report, Axis x) {
    using Key = std::tuple<std::string, std::vector<double>, std::string, int, double, double>;
    std::map<Key, std::size_t> ids;
    std::vector<std::tuple<std::size_t, double, std::size_t, const CellRecord*>> items;
    for (const auto& c : report.cells) {
        if (!c.ok()) continue;
        const auto& in = c.inputs;
        const double other = x == Axis::Rho ? in.standardized_ratio() : in.rho;
        const double xv = x == Axis::Rho ? in.rho : in.standardized_ratio();
        const Key key{std::string(to_string(in.family)), in.beta, std::string(to_string(in.kind)),
                      in.time_points, in.total_items, other};
        const auto [it, inserted] = ids.try_emplace(key, ids.size());
        items.emplace_back(it->second, xv, c.index, &c);
    }
    std::stable_sort(items.begin(), items.end(), [](const auto& l, const auto& r) {
        return std::tie(std::get<0>(l), std::get<1>(l), std::get<2>(l)) <
               std::tie(std::get<0>(r), std::get<1>(r), std::get<2>(r));
    });
    Ordered out;
    for (const auto& item : items) {
        out.series.push_back(std::get<0>(item));
        out.cells.push_back(std::get<3>(item));
    }
    return out;
}

}  // namespace

Table emit_figure_data(const RunReport& report, std::string_view kind) {
    const auto& kinds = figure_kinds();
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
        throw Error(ErrorCode::Usage, "unknown figure kind '" + std::string(kind) + "'");
    }
    Table t;
    const auto common = [](const CellInputs& in) {
        return std::vector<std::string>{std::string(to_string(in.family)), join_numbers(in.beta),
                                        std::string(to_string(in.kind))};
    };

    if (kind == "weights-per-time") {
        t.header = {"cell", "family", "kind", "beta", "a", "rho", "time_index", "time", "weight"};
        for (const auto& c : report.cells) {
            if (!c.ok()) continue;
            const auto base = common(c.inputs);
            for (std::size_t j = 0; j < c.weights.size(); ++j) {
                t.rows.push_back({std::to_string(c.index), base[0], base[2], base[1],
                                  format_number(c.inputs.standardized_ratio()),
                                  format_number(c.inputs.rho), std::to_string(j + 1),
                                  std::to_string(j), format_number(c.weights[j])});
            }
        }
        return t;
    }

    const bool over_rho = kind == "weight-vs-rho" || kind == "efficiency-vs-rho";
    const bool weights = kind == "weight-vs-rho" || kind == "weight-vs-a";
    const std::string other_name = over_rho ? "a" : "rho";
    const std::string x_name = over_rho ? "rho" : "a";
    t.header = {"series", "family", "kind", "beta", other_name, x_name};
    if (weights) {
        t.header.insert(t.header.end(), {"time_index", "weight"});
    } else {
        t.header.emplace_back("uniform_efficiency");
    }

    const auto ordered = order_by_series(report, over_rho ? Axis::Rho : Axis::A);
    for (std::size_t i = 0; i < ordered.cells.size(); ++i) {
        const auto& c = *ordered.cells[i];
        const auto base = common(c.inputs);
        const double a = c.inputs.standardized_ratio();
        std::vector<std::string> row{std::to_string(ordered.series[i]), base[0], base[2], base[1],
                                     format_number(over_rho ? a : c.inputs.rho),
                                     format_number(over_rho ? c.inputs.rho : a)};
        if (!weights) {
            row.push_back(format_number(c.uniform_efficiency));
            t.rows.push_back(std::move(row));
            continue;
        }
        for (std::size_t j = 0; j < c.weights.size(); ++j) {
            auto full = row;
            full.push_back(std::to_string(j + 1));
            full.push_back(format_number(c.weights[j]));
            t.rows.push_back(std::move(full));
        }
    }
    return t;
}

}  // namespace growthdesign
