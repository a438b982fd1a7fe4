// Command-line driver: analyze | witness | reduce | solve on a model file.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "daeire/emit.hpp"
#include "daeire/parser.hpp"
#include "daeire/solver.hpp"

namespace fs = std::filesystem;
using namespace daeire;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

Point load_initial(const std::string& path, const DaeSystem& sys) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    Point p;
    if (j.contains("t")) p.t = j["t"].get<double>();
    const auto& values = j.at("values");
    for (auto it = values.begin(); it != values.end(); ++it) {
        std::string name = it.key();
        int order = 0;
        while (!name.empty() && name.back() == '\'') {
            name.pop_back();
            ++order;
        }
        auto vi = std::find(sys.variables.begin(), sys.variables.end(), name);
        if (vi == sys.variables.end()) throw Error("initial point names unknown variable '" + name + "'");
        p.set(JetVar{int(vi - sys.variables.begin()), order}, it.value().get<double>());
    }
    return p;
}

std::string pretty_system(const ProlongedSystem& ps) {
    std::ostringstream out;
    out << "constraints:\n";
    for (const Expr& e : ps.constraints()) out << "  " << to_string(e, ps.var_names) << " = 0\n";
    out << "top block:\n";
    for (const Expr& e : ps.top_block()) out << "  " << to_string(e, ps.var_names) << " = 0\n";
    return out.str();
}

struct Options {
    std::string model;
    double abstol = 1e-6;
    double reltol = 1e-3;
    double step = 1e-2;
    std::uint64_t seed = 0;
    double beta = 1e5;
    int max_passes = 10;
    std::string out_dir = ".";
    std::string initial;
    double t0 = 0.0, tend = 0.0;
    bool has_t0 = false, has_tend = false;
};

SolveConfig make_config(const Options& opt, const DaeSystem& sys) {
    SolveConfig cfg;
    cfg.abstol = opt.abstol;
    cfg.reltol = opt.reltol;
    cfg.step = opt.step;
    cfg.seed = opt.seed;
    cfg.beta = opt.beta;
    cfg.max_passes = opt.max_passes;
    cfg.t0 = opt.has_t0 ? opt.t0 : sys.t0;
    cfg.t_end = opt.has_tend ? opt.tend : sys.t_end;
    return cfg;
}

int run_command(const std::string& command, const Options& opt) {
    DaeSystem sys = parse_model_auto(read_file(opt.model));
    validate_square(sys);
    SolveConfig cfg = make_config(opt, sys);
    fs::path out_dir(opt.out_dir);
    fs::create_directories(out_dir);

    std::optional<Point> initial;
    if (!opt.initial.empty()) initial = load_initial(opt.initial, sys);

    ReportInput report;
    report.sys = &sys;
    report.seed = opt.seed;

    SignatureMatrix sigma = signature_matrix(sys);
    StructuralSolution structural = solve_assignment(sigma);
    report.sigma = &sigma;
    report.structural = &structural;

    if (command == "analyze") {
        write_file(out_dir / "report.json", emit_report_json(report));
        std::cout << "delta = " << structural.delta << "\n";
        return 0;
    }

    ProlongedSystem ps0 = prolong(sys, structural);
    if (command == "witness") {
        PolySystem poly = make_poly_system(ps0.constraints(), cfg.t0);
        WitnessSet witness = witness_points(poly, cfg.seed, cfg.abstol, cfg.beta);
        report.witness = &witness;
        write_file(out_dir / "witness.json", emit_report_json(report));
        std::cout << witness.n_points() << " witness point(s)\n";
        return 0;
    }

    // reduce and solve share the full pipeline; reduce stops before
    // integration output but still reports the pass ledger.
    GlobalSolveResult result = global_solve(sys, cfg, initial);
    report.witness = result.witness ? &*result.witness : nullptr;
    report.components = &result.components;

    int failed = 0;
    for (const auto& comp : result.components)
        if (!comp.ok()) ++failed;

    if (command == "reduce") {
        std::ostringstream txt;
        for (const auto& comp : result.components) {
            txt << "component " << comp.component_tag << ":\n";
            if (!comp.reduced) {
                txt << "  failed: " << comp.error << "\n";
                continue;
            }
            txt << pretty_system(*comp.reduced);
        }
        std::string reduced = txt.str();
        report.reduced_system_text = reduced;
        report.status = failed == 0 ? "ok" : "partial";
        write_file(out_dir / "report.json", emit_report_json(report));
        for (const auto& comp : result.components) {
            std::cout << "component " << comp.component_tag << ": " << comp.passes.size()
                      << " pass(es), " << (comp.ok() ? "ok" : comp.error) << "\n";
        }
        return failed == 0 ? 0 : (failed == int(result.components.size()) ? 1 : 2);
    }

    // solve
    report.status = failed == 0 ? "ok" : "partial";
    write_file(out_dir / "report.json", emit_report_json(report));
    for (const auto& traj : result.trajectories) {
        fs::path csv = out_dir / ("trajectory_" + std::to_string(traj.component_tag) + ".csv");
        write_file(csv, emit_trajectory_csv(traj));
        std::cout << csv.string() << ": " << traj.times.size() << " samples\n";
    }
    for (const auto& comp : result.components)
        if (!comp.ok()) std::cerr << "component " << comp.component_tag << ": " << comp.error << "\n";
    if (failed == int(result.components.size()) && failed > 0) return 1;
    return failed == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural analysis, degeneration detection and index reduction by embedding "
                 "for polynomially nonlinear DAE systems"};
    app.require_subcommand(1);

    Options opt;
    std::string command;
    for (const char* name : {"analyze", "witness", "reduce", "solve"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("model", opt.model, "model file (DSL or JSON)")->required();
        sub->add_option("--abstol", opt.abstol, "absolute tolerance");
        sub->add_option("--reltol", opt.reltol, "relative tolerance");
        sub->add_option("--step", opt.step, "integration step");
        sub->add_option("--seed", opt.seed, "random seed");
        sub->add_option("--beta", opt.beta, "penalty factor");
        sub->add_option("--max-passes", opt.max_passes, "reduction pass cap");
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--initial", opt.initial, "initial point JSON for non-polynomial constraints");
        sub->add_option("--t0", opt.t0)->each([&opt](const std::string&) { opt.has_t0 = true; });
        sub->add_option("--tend", opt.tend)->each([&opt](const std::string&) { opt.has_tend = true; });
        sub->callback([&command, name]() { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        return run_command(command, opt);
    } catch (const NoPerfectMatchingError& e) {
        std::cerr << "structural analysis failed: " << e.what() << "\n";
        return 1;
    } catch (const NonSquareError& e) {
        std::cerr << "validation failed: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
