// Command-line surface: model ingestion plus the analyses as subcommands.
// Exit codes: 0 success (blow-up and quench are classified answers),
// 2 configuration error, 3 numerical failure, 4 undetermined at t_max.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pullin/dynamics.hpp"
#include "pullin/energy.hpp"
#include "pullin/errors.hpp"
#include "pullin/format.hpp"
#include "pullin/manifold.hpp"
#include "pullin/model_io.hpp"
#include "pullin/parallel.hpp"
#include "pullin/stationary.hpp"

namespace {

using nlohmann::json;
using namespace pullin;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUndetermined = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    std::optional<double> tol;
    std::optional<double> tmax;
};

json load_config(const std::string& path,
                 const std::set<std::string>& allowed) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in config");
    }
    return doc;
}

void write_text(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file " + out_path);
    out << text;
}

std::string report_to_text(const json& report, const std::string& format) {
    if (format == "json") return report.dump(2) + "\n";
    // csv: flat key,value rows (nested objects are skipped).
    std::ostringstream os;
    os << "key,value\n";
    for (auto it = report.begin(); it != report.end(); ++it) {
        if (it.value().is_number())
            os << it.key() << ',' << num17(it.value().get<double>()) << '\n';
        else if (it.value().is_string())
            os << it.key() << ',' << it.value().get<std::string>() << '\n';
        else if (it.value().is_boolean())
            os << it.key() << ',' << (it.value().get<bool>() ? "true" : "false")
               << '\n';
    }
    return os.str();
}

std::vector<double> config_grid(const json& doc, const std::string& key) {
    const auto& v = doc.at(key);
    if (!v.is_array() || v.empty())
        throw ConfigError("key \"" + key + "\" must be a non-empty array");
    std::vector<double> grid;
    grid.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number())
            throw ConfigError("grid \"" + key + "\" must contain numbers");
        const double d = x.get<double>();
        if (!std::isfinite(d))
            throw ConfigError("grid \"" + key + "\" must be finite");
        grid.push_back(d);
    }
    return grid;
}

IntegrationOptions integration_options(const json& doc) {
    IntegrationOptions opts;
    if (doc.contains("rtol")) opts.rtol = config_number(doc, "rtol");
    if (doc.contains("atol")) opts.atol = config_number(doc, "atol");
    if (doc.contains("sample_dt")) opts.sample_dt = config_number(doc, "sample_dt");
    return opts;
}

int cmd_stationary(const CommonArgs& args) {
    const json doc = load_config(args.config_path,
                                 {"g", "beta", "f", "lambda"});
    const ModelSpec spec = model_from_json(doc);
    const StationaryProfile prof = stationary_profile(spec.g);

    json report = {{"model", model_to_json(spec)},
                   {"p", prof.p},
                   {"lambda_star", prof.lambda_star},
                   {"lambda_bar", prof.lambda_bar},
                   {"phi2_bar", prof.phi2_bar}};
    if (doc.contains("lambda")) {
        const double lambda = config_number(doc, "lambda");
        const BranchPoint br = solve_branches(spec.g, lambda);
        report["lambda"] = lambda;
        report["phi1"] = br.phi1;
        report["phi2"] = br.phi2;
        report["q"] = br.q;
        if (lambda < prof.lambda_star * (1.0 - 1e-14)) {
            EnergyContext ctx(spec.g, lambda);
            report["j_phi1"] = ctx.j_phi1();
            report["j_phi2"] = ctx.j_phi2();
            report["l"] = ctx.barrier_left();
        }
    }
    write_text(args.out_path, report_to_text(report, args.format));
    return 0;
}

std::string classification_label(const ClassificationResult& res) {
    switch (res.trajectory.termination) {
        case Termination::Quench: return "Quench";
        case Termination::BlowUp: return "BlowUp";
        default: break;
    }
    switch (res.gamma) {
        case Gamma::Gamma1: return "Gamma1";
        case Gamma::Gamma2Boundary: return "Gamma2Boundary";
        case Gamma::Gamma3: return "Gamma3";
        case Gamma::Periodic: return "Periodic";
        case Gamma::OutOfScope: return "Undetermined";
    }
    return "Undetermined";
}

json classification_summary(const ModelSpec& spec, const Problem& prob,
                            const ClassificationResult& res) {
    const Trajectory& traj = res.trajectory;
    json summary = {{"classification", classification_label(res)},
                    {"gamma", to_string(res.gamma)},
                    {"termination", to_string(traj.termination)},
                    {"certificate", res.certificate},
                    {"t_end", traj.t_end},
                    {"u_end", traj.states.back().u},
                    {"v_end", traj.states.back().v},
                    {"event_count", traj.events.size()},
                    {"model", model_to_json(spec)},
                    {"lambda", prob.lambda},
                    {"alpha", prob.alpha},
                    {"u0", prob.u0},
                    {"v0", prob.v0}};
    const double ls = lambda_star(spec.g);
    if (prob.lambda < ls * (1.0 - 1e-12)) {
        const BranchPoint br = solve_branches(spec.g, prob.lambda);
        summary["phi1"] = br.phi1;
        summary["phi2"] = br.phi2;
    }
    return summary;
}

int run_problem(const CommonArgs& args, bool write_trajectory) {
    const json doc = load_config(
        args.config_path, {"g", "beta", "f", "lambda", "alpha", "u0", "v0",
                           "t_max", "rtol", "atol", "sample_dt"});
    const ModelSpec spec = model_from_json(doc);
    Problem prob{spec.g, spec.f, config_number(doc, "alpha"),
                 config_number(doc, "lambda"), config_number(doc, "u0"),
                 config_number(doc, "v0")};
    double t_max = doc.contains("t_max") ? config_number(doc, "t_max") : 50.0;
    if (args.tmax) t_max = *args.tmax;
    if (!(t_max > 0.0)) throw ConfigError("t_max must be positive");

    const IntegrationOptions opts = integration_options(doc);
    const ClassificationResult res = classify_orbit(prob, t_max, opts);
    const json summary = classification_summary(spec, prob, res);

    if (write_trajectory) {
        if (args.out_path.empty())
            throw ConfigError("simulate requires --out <prefix>");
        {
            std::ofstream csv(args.out_path + ".csv", std::ios::binary);
            if (!csv) throw ConfigError("cannot open " + args.out_path + ".csv");
            write_trajectory_csv(csv, res.trajectory);
        }
        {
            std::ofstream ev(args.out_path + ".events.jsonl", std::ios::binary);
            write_events_jsonl(ev, res.trajectory);
        }
        {
            std::ofstream sj(args.out_path + ".summary.json", std::ios::binary);
            sj << summary.dump(2) << "\n";
        }
        std::cout << summary.dump(2) << "\n";
    } else {
        write_text(args.out_path, report_to_text(summary, args.format));
    }
    return summary.at("classification").get<std::string>() == "Undetermined"
               ? kExitUndetermined
               : 0;
}

int cmd_threshold(const CommonArgs& args) {
    const json doc = load_config(
        args.config_path,
        {"g", "beta", "f", "alpha_grid", "lambda_grid", "tol"});
    const ModelSpec spec = model_from_json(doc);
    if (!spec.f.is_linear())
        throw ConfigError("threshold requires linear damping f(v) = v");
    const bool has_alpha = doc.contains("alpha_grid");
    const bool has_lambda = doc.contains("lambda_grid");
    if (!has_alpha && !has_lambda)
        throw ConfigError("threshold needs alpha_grid and/or lambda_grid");

    double tol = doc.contains("tol") ? config_number(doc, "tol") : 1e-8;
    if (args.tol) tol = *args.tol;
    if (!(tol > 0.0)) throw ConfigError("tol must be positive");

    const StationaryProfile prof = stationary_profile(spec.g);
    const std::string meta = "# lambda_bar = " + num17(prof.lambda_bar) +
                             "\n# lambda_star = " + num17(prof.lambda_star) +
                             "\n";

    std::string alpha_csv, lambda_csv;
    if (has_alpha) {
        const auto grid = config_grid(doc, "alpha_grid");
        std::vector<double> vals(grid.size());
        parallel_for_indexed(grid.size(), [&](std::size_t i) {
            if (!(grid[i] >= 0.0))
                throw ConfigError("alpha_grid entries must be >= 0");
            vals[i] = lambda_threshold(spec.g, grid[i], tol);
        });
        std::ostringstream os;
        os << meta << "alpha,lambda_threshold\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            os << num17(grid[i]) << ',' << num17(vals[i]) << '\n';
        alpha_csv = os.str();
    }
    if (has_lambda) {
        const auto grid = config_grid(doc, "lambda_grid");
        std::vector<double> vals(grid.size());
        parallel_for_indexed(grid.size(), [&](std::size_t i) {
            vals[i] = alpha_star(spec.g, grid[i], tol);
        });
        std::ostringstream os;
        os << meta << "lambda,alpha_star\n";
        for (std::size_t i = 0; i < grid.size(); ++i)
            os << num17(grid[i]) << ',' << num17(vals[i]) << '\n';
        lambda_csv = os.str();
    }

    if (has_alpha && has_lambda) {
        if (args.out_path.empty())
            throw ConfigError(
                "threshold with both grids requires --out <prefix>");
        write_text(args.out_path + ".lambda_threshold.csv", alpha_csv);
        write_text(args.out_path + ".alpha_star.csv", lambda_csv);
    } else {
        write_text(args.out_path, has_alpha ? alpha_csv : lambda_csv);
    }
    return 0;
}

int cmd_bifurcation(const CommonArgs& args) {
    const json doc =
        load_config(args.config_path, {"g", "beta", "f", "lambda_grid"});
    const ModelSpec spec = model_from_json(doc);
    const auto grid = config_grid(doc, "lambda_grid");
    const auto rows = bifurcation_sweep(spec.g, grid);
    std::ostringstream os;
    write_bifurcation_csv(os, rows);
    write_text(args.out_path, os.str());
    return 0;
}

int cmd_validate(const CommonArgs& args) {
    const json doc = load_config(
        args.config_path,
        {"g", "beta", "f", "points", "v_max", "u_min", "u_cap"});
    const ModelSpec spec = model_from_json(doc);
    GridSpec grid;
    if (doc.contains("points")) {
        const double p = config_number(doc, "points");
        grid.points = static_cast<int>(p);
    }
    if (doc.contains("v_max")) grid.v_max = config_number(doc, "v_max");
    if (doc.contains("u_min")) grid.u_min = config_number(doc, "u_min");
    if (doc.contains("u_cap")) grid.u_cap = config_number(doc, "u_cap");

    const ValidationReport rep = validate_assumptions(spec.g, spec.f, grid);
    json checks = json::array();
    for (const auto& c : rep.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"witness_x", c.witness_x},
                          {"witness_value", c.witness_value},
                          {"detail", c.detail}});
    }
    const json report = {{"model", model_to_json(spec)},
                         {"all_passed", rep.all_passed()},
                         {"checks", checks}};
    write_text(args.out_path, report.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-plane and threshold analysis for u'' + a f(u') + b u = l g(u)"};
    app.require_subcommand(1);

    CommonArgs args;
    auto add_common = [&args](CLI::App* sub, bool needs_tmax = false,
                              bool needs_tol = false) {
        sub->add_option("--config", args.config_path, "JSON configuration file")
            ->required();
        sub->add_option("--out", args.out_path, "output path (or prefix)");
        sub->add_option("--format", args.format, "csv|json")
            ->check(CLI::IsMember({"csv", "json"}));
        if (needs_tmax)
            sub->add_option_function<double>(
                "--tmax", [&args](double v) { args.tmax = v; },
                "integration horizon override");
        if (needs_tol)
            sub->add_option_function<double>(
                "--tol", [&args](double v) { args.tol = v; },
                "bisection tolerance override");
    };

    auto* stat = app.add_subcommand("stationary", "fold point, thresholds, branches");
    add_common(stat);
    auto* sim = app.add_subcommand("simulate", "integrate and write trajectory files");
    add_common(sim, true);
    auto* cls = app.add_subcommand("classify", "classify one orbit");
    add_common(cls, true);
    auto* thr = app.add_subcommand("threshold", "dynamical threshold curves");
    add_common(thr, false, true);
    auto* bif = app.add_subcommand("bifurcation", "branch table over a lambda grid");
    add_common(bif);
    auto* val = app.add_subcommand("validate", "check model assumptions on a grid");
    add_common(val);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (stat->parsed()) return cmd_stationary(args);
        if (sim->parsed()) return run_problem(args, true);
        if (cls->parsed()) return run_problem(args, false);
        if (thr->parsed()) return cmd_threshold(args);
        if (bif->parsed()) return cmd_bifurcation(args);
        if (val->parsed()) return cmd_validate(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitConfig;
}
