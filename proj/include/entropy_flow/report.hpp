#pragma once

/**
 * @file report.hpp
 * @brief Command drivers behind the entropy_flow CLI: density-spec ingestion,
 *        the verify / flow / nash / scaling commands and their CSV/JSON output.
 *
 * Exit codes: 0 all checks pass, 1 an inequality failed, 2 usage or config
 * error, 3 numerical-domain error (domain too small, unnormalized input).
 *
 * Output is assembled in memory and written only after the command succeeds,
 * so an error never leaves a partial file behind. Numbers are printed with
 * 17 significant digits in the C locale.
 */

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "entropy_flow/analytic.hpp"
#include "entropy_flow/errors.hpp"
#include "entropy_flow/functionals.hpp"
#include "entropy_flow/heat_flow.hpp"
#include "entropy_flow/inequalities.hpp"

namespace entropy_flow {

/// Malformed density-spec file or JSON.
class SpecParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

namespace exit_code {
inline constexpr int pass = 0;
inline constexpr int inequality_failure = 1;
inline constexpr int usage_error = 2;
inline constexpr int numerical_error = 3;
}  // namespace exit_code

enum class Command { verify, flow, nash, scaling };
enum class OutputFormat { csv, json };

struct RunConfig {
    Command command = Command::verify;
    std::string density_spec_path;
    std::optional<double> half_width;
    std::optional<std::size_t> points;
    double t_min = 0.2;
    double t_max = 2.0;
    std::size_t steps = 10;
    double dt = 0.0;  ///< <= 0 selects 1e-3 * max(t, 1)
    std::optional<double> tol;
    OutputFormat format = OutputFormat::csv;
    std::string out_path;  ///< empty writes to the stream passed to run()
    std::vector<double> scales{0.5, 2.0, 3.0};

    void validate() const {
        if (density_spec_path.empty()) {
            throw ValidationError("--density is required");
        }
        if (command == Command::flow) {
            if (!(t_min > 0.0)) {
                throw ValidationError("--t-min must be positive for a flow");
            }
            if (!(t_max > t_min)) {
                throw ValidationError("--t-max must exceed --t-min");
            }
            if (steps < 3) {
                throw ValidationError("--steps must be at least 3");
            }
        }
        if (tol && !(*tol > 0.0)) {
            throw ValidationError("--tol must be positive");
        }
        if (command == Command::scaling) {
            if (scales.empty()) {
                throw ValidationError("--a needs at least one scaling factor");
            }
            for (const double a : scales) {
                if (!(a >= 0.25 && a <= 4.0)) {
                    throw ValidationError("scaling factor " + std::to_string(a) + " outside [0.25, 4]");
                }
            }
        }
    }
};

/// A parsed density file: the analytic spec plus an optional mass multiplier.
struct DensityInput {
    DensitySpec spec;
    double mass = 1.0;
};

namespace detail {

inline GaussianSpec parse_gaussian(const nlohmann::json& j, int dim) {
    GaussianSpec g;
    g.dim = j.value("dim", dim);
    if (!j.contains("sigma")) {
        throw SpecParseError("gaussian spec needs \"sigma\"");
    }
    g.sigma = j.at("sigma").get<double>();
    g.mean = j.contains("mean") ? j.at("mean").get<std::vector<double>>()
                                : std::vector<double>(static_cast<std::size_t>(std::max(g.dim, 0)), 0.0);
    return g;
}

}  // namespace detail

/// Parses {"type": "gaussian"|"mixture", "dim": n, "sigma": s, "mean": [...],
/// "weights": [...], "components": [...], "mass": mu}.
inline DensityInput parse_density_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw SpecParseError(std::string("malformed density JSON: ") + e.what());
    }
    try {
        if (!j.is_object()) {
            throw SpecParseError("density spec must be a JSON object");
        }
        const auto type = j.at("type").get<std::string>();
        const int dim = j.at("dim").get<int>();
        DensityInput out;
        out.mass = j.value("mass", 1.0);
        if (!(out.mass > 0.0) || !std::isfinite(out.mass)) {
            throw SpecParseError("\"mass\" must be positive");
        }
        if (type == "gaussian") {
            out.spec = detail::parse_gaussian(j, dim);
        } else if (type == "mixture") {
            MixtureSpec m;
            for (const auto& c : j.at("components")) {
                m.components.push_back(detail::parse_gaussian(c, dim));
            }
            m.weights = j.at("weights").get<std::vector<double>>();
            out.spec = m;
        } else {
            throw SpecParseError("unknown density type \"" + type + "\"");
        }
        validate(out.spec);
        if (spec_dim(out.spec) != dim) {
            throw SpecParseError("component dimension does not match \"dim\"");
        }
        if (dim != 1 && dim != 2) {
            throw SpecParseError("grids support dim 1 or 2 only");
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw SpecParseError(std::string("invalid density spec: ") + e.what());
    }
}

inline DensityInput load_density_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SpecParseError("cannot open density file " + path);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_density_json(buf.str());
}

namespace detail {

/// 17 significant digits, '.' separator.
inline std::string format_number(double x) {
    if (!std::isfinite(x)) {
        return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string json_number(double x) {
    return std::isfinite(x) ? format_number(x) : "null";
}

inline std::string json_string(const std::string& s) {
    return nlohmann::json(s).dump();
}

inline GridDomain domain_for(const RunConfig& cfg, int dim) {
    GridDomain d = default_domain(dim);
    const double half_width = cfg.half_width.value_or(d.half_width[0]);
    const std::size_t points = cfg.points.value_or(d.points[0]);
    return GridDomain::make(dim, half_width, points);
}

inline DensityGrid density_grid(const RunConfig& cfg, const DensityInput& input) {
    const auto g = build_grid(input.spec, domain_for(cfg, spec_dim(input.spec)));
    return input.mass == 1.0 ? g : scale(g, input.mass);
}

/// Result of one command: the rendered document and the exit code.
struct CommandOutput {
    std::string text;
    int code = exit_code::pass;
    std::vector<std::string> failures;
};

inline std::string reports_csv(const std::vector<InequalityReport>& reports) {
    std::string s = "tag,lhs,rhs,slack,tol,pass,meta\n";
    for (const auto& r : reports) {
        s += std::string(to_string(r.tag)) + ',' + format_number(r.lhs) + ',' + format_number(r.rhs) + ',' +
             format_number(r.slack) + ',' + format_number(r.tol) + ',' + (r.pass ? "true" : "false") + ',' +
             r.meta + '\n';
    }
    return s;
}

inline std::string report_json(const InequalityReport& r) {
    std::string s = "{\"tag\":\"" + std::string(to_string(r.tag)) + "\",\"lhs\":" + json_number(r.lhs) +
                    ",\"rhs\":" + json_number(r.rhs) + ",\"slack\":" + json_number(r.slack) +
                    ",\"tol\":" + json_number(r.tol) + ",\"pass\":" + (r.pass ? "true" : "false") +
                    ",\"meta\":" + json_string(r.meta) + ",\"extra\":{";
    for (std::size_t i = 0; i < r.extra.size(); ++i) {
        s += (i ? "," : "") + json_string(r.extra[i].first) + ':' + json_number(r.extra[i].second);
    }
    return s + "}}";
}

inline std::string reports_json(const std::string& command, const std::vector<InequalityReport>& reports) {
    bool all = true;
    std::string s = "{\"command\":\"" + command + "\",\"reports\":[";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        s += (i ? ",\n" : "\n") + report_json(reports[i]);
        all = all && reports[i].pass;
    }
    return s + "\n],\"all_pass\":" + (all ? "true" : "false") + "}\n";
}

inline CommandOutput finish(const std::string& command, std::vector<InequalityReport> reports, OutputFormat fmt) {
    CommandOutput out;
    out.text = fmt == OutputFormat::csv ? reports_csv(reports) : reports_json(command, reports);
    for (const auto& r : reports) {
        if (!r.pass) {
            out.failures.emplace_back(to_string(r.tag));
        }
    }
    out.code = out.failures.empty() ? exit_code::pass : exit_code::inequality_failure;
    return out;
}

}  // namespace detail

/// Every check applicable to the density. Unit-mass inputs run the full
/// chain; other masses run the mass-general bounds only.
inline std::vector<InequalityReport> verify_reports(const DensityGrid& g, std::optional<double> tol) {
    const auto rel = [&](double fallback) { return tol.value_or(fallback); };
    std::vector<InequalityReport> reports;
    if (std::abs(g.mass() - 1.0) > unit_mass_tol) {
        reports.push_back(check_gen_fisher(g, rel(tolerance::standard)));
        reports.push_back(check_nash(g, rel(tolerance::standard)));
        return reports;
    }
    const double sigma = second_moment(g) / g.dim();
    reports.push_back(check_epi(g, g, rel(tolerance::standard)));
    reports.push_back(check_key_inequality(g, rel(tolerance::key)));
    reports.push_back(check_isoperimetric(g, rel(tolerance::standard)));
    reports.push_back(check_lsi(g, sigma, rel(tolerance::standard)));
    reports.push_back(check_improved_lsi(g, rel(tolerance::standard)));
    reports.push_back(check_ck(g, sigma, rel(tolerance::ck)));
    reports.push_back(check_gen_fisher(g, rel(tolerance::standard)));
    reports.push_back(check_jensen_step(g, rel(tolerance::standard)));
    reports.push_back(check_nash(g, rel(tolerance::standard)));
    for (auto& r : check_scaling_laws(g, 2.0, rel(tolerance::standard))) {
        reports.push_back(std::move(r));
    }
    return reports;
}

inline detail::CommandOutput cmd_verify(const RunConfig& cfg, const DensityInput& input) {
    const auto g = detail::density_grid(cfg, input);
    return detail::finish("verify", verify_reports(g, cfg.tol), cfg.format);
}

inline constexpr const char* flow_csv_header =
    "t,H,N,I,J,Upsilon,debruijn_residual,fisher_residual,n_second_diff";

inline std::vector<double> flow_times(const RunConfig& cfg) {
    std::vector<double> times(cfg.steps);
    for (std::size_t i = 0; i < cfg.steps; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(cfg.steps - 1);
        times[i] = cfg.t_min + frac * (cfg.t_max - cfg.t_min);
    }
    return times;
}

/// Flow trace table. Exits 1 when the entropy power is convex beyond
/// tol * N at some time (the concavity/KEY property fails).
inline detail::CommandOutput cmd_flow(const RunConfig& cfg, const DensityInput& input) {
    const auto g = detail::density_grid(cfg, input);
    const auto [unit, mu] = normalize(g);
    const auto times = flow_times(cfg);
    const auto trace = flow_trace(unit, times, cfg.dt);
    const double tol = cfg.tol.value_or(1e-6);

    detail::CommandOutput out;
    std::string& s = out.text;
    if (cfg.format == OutputFormat::csv) {
        s = std::string(flow_csv_header) + '\n';
    } else {
        s = "{\"command\":\"flow\",\"columns\":[\"t\",\"H\",\"N\",\"I\",\"J\",\"Upsilon\",\"debruijn_residual\","
            "\"fisher_residual\",\"n_second_diff\"],\"rows\":[";
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto& sn = trace.snapshots[i];
        const double row[] = {sn.t, sn.H, sn.N, sn.I, sn.J, sn.Upsilon, trace.debruijn_residual[i],
                              trace.fisher_residual[i], trace.n_second_diff[i]};
        if (cfg.format == OutputFormat::csv) {
            for (std::size_t c = 0; c < std::size(row); ++c) {
                s += (c ? "," : "") + detail::format_number(row[c]);
            }
            s += '\n';
        } else {
            s += (i ? ",\n[" : "\n[");
            for (std::size_t c = 0; c < std::size(row); ++c) {
                s += (c ? "," : "") + detail::json_number(row[c]);
            }
            s += ']';
        }
        if (trace.n_second_diff[i] > tol * sn.N) {
            out.failures.push_back("KEY (entropy power convex at t=" + detail::format_number(sn.t) + ")");
        }
    }
    if (cfg.format == OutputFormat::json) {
        s += "\n]}\n";
    }
    out.code = out.failures.empty() ? exit_code::pass : exit_code::inequality_failure;
    return out;
}

inline detail::CommandOutput cmd_nash(const RunConfig& cfg, const DensityInput& input) {
    const auto g = detail::density_grid(cfg, input);
    const auto r = check_nash(g, cfg.tol.value_or(tolerance::standard));
    detail::CommandOutput out;
    if (cfg.format == OutputFormat::csv) {
        out.text = "tag,lhs,rhs,ratio,identity_residual,slack,tol,pass\n" + std::string(to_string(r.tag)) + ',' +
                   detail::format_number(r.lhs) + ',' + detail::format_number(r.rhs) + ',' +
                   detail::format_number(r.extra_value("ratio")) + ',' +
                   detail::format_number(r.extra_value("identity_residual")) + ',' +
                   detail::format_number(r.slack) + ',' + detail::format_number(r.tol) + ',' +
                   (r.pass ? "true" : "false") + '\n';
    } else {
        out.text = detail::reports_json("nash", {r});
    }
    if (!r.pass) {
        out.failures.emplace_back(to_string(r.tag));
    }
    out.code = out.failures.empty() ? exit_code::pass : exit_code::inequality_failure;
    return out;
}

inline detail::CommandOutput cmd_scaling(const RunConfig& cfg, const DensityInput& input) {
    const auto g = detail::density_grid(cfg, input);
    const auto [unit, mu] = normalize(g);
    std::vector<InequalityReport> reports;
    for (const double a : cfg.scales) {
        for (auto& r : check_scaling_laws(unit, a, cfg.tol.value_or(tolerance::standard))) {
            reports.push_back(std::move(r));
        }
    }
    if (cfg.format == OutputFormat::json) {
        return detail::finish("scaling", std::move(reports), cfg.format);
    }
    detail::CommandOutput out;
    out.text = "tag,a,lhs,rhs,slack,tol,pass\n";
    for (const auto& r : reports) {
        out.text += std::string(to_string(r.tag)) + ',' + detail::format_number(r.extra_value("a")) + ',' +
                    detail::format_number(r.lhs) + ',' + detail::format_number(r.rhs) + ',' +
                    detail::format_number(r.slack) + ',' + detail::format_number(r.tol) + ',' +
                    (r.pass ? "true" : "false") + '\n';
        if (!r.pass) {
            out.failures.emplace_back(to_string(r.tag));
        }
    }
    out.code = out.failures.empty() ? exit_code::pass : exit_code::inequality_failure;
    return out;
}

/// Runs one command end to end. The document goes to cfg.out_path, or to
/// `out` when no path is set; diagnostics go to `err`.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::CommandOutput result;
    try {
        cfg.validate();
        const auto input = load_density_file(cfg.density_spec_path);
        switch (cfg.command) {
            case Command::verify: result = cmd_verify(cfg, input); break;
            case Command::flow: result = cmd_flow(cfg, input); break;
            case Command::nash: result = cmd_nash(cfg, input); break;
            case Command::scaling: result = cmd_scaling(cfg, input); break;
        }
    } catch (const TailMassError& e) {
        err << "error: " << e.what() << "\nhint: increase --half-width so the density decays inside the grid\n";
        return exit_code::numerical_error;
    } catch (const NumericalDomainError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::numerical_error;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return exit_code::usage_error;
    }

    if (cfg.out_path.empty()) {
        out << result.text;
    } else {
        std::ofstream file(cfg.out_path, std::ios::binary | std::ios::trunc);
        if (!file) {
            err << "error: cannot write " << cfg.out_path << '\n';
            return exit_code::usage_error;
        }
        file << result.text;
    }
    for (const auto& f : result.failures) {
        err << "FAILED: " << f << '\n';
    }
    return result.code;
}

}  // namespace entropy_flow
