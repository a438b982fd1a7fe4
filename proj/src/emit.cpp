#include "daeire/emit.hpp"

#include <cstdio>

#include <nlohmann/json.hpp>

namespace daeire {

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

std::string emit_trajectory_csv(const Trajectory& traj) {
    std::string out = "t";
    for (const auto& name : traj.variables) out += "," + name;
    out += ",component\n";
    for (size_t i = 0; i < traj.times.size(); ++i) {
        out += format_real(traj.times[i]);
        for (double v : traj.states[i]) out += "," + format_real(v);
        out += "," + std::to_string(traj.component_tag) + "\n";
    }
    return out;
}

namespace {

nlohmann::json sigma_json(const SignatureMatrix& sigma) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < sigma.n; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < sigma.n; ++j) {
            if (sigma.at(i, j))
                row.push_back(*sigma.at(i, j));
            else
                row.push_back(nullptr);  // -infinity
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

std::string emit_report_json(const ReportInput& in) {
    nlohmann::json j;
    j["schema"] = 1;
    j["status"] = in.status;
    j["seed"] = in.seed;
    if (in.sys) {
        j["variables"] = in.sys->variables;
        j["interval"] = {in.sys->t0, in.sys->t_end};
    }
    if (in.sigma) j["signature_matrix"] = sigma_json(*in.sigma);
    if (in.structural) {
        j["c"] = in.structural->c;
        j["d"] = in.structural->d;
        j["delta"] = in.structural->delta;
        j["transversal"] = in.structural->transversal;
    }
    if (in.witness) {
        nlohmann::json w;
        w["seed"] = in.witness->rng_seed;
        w["formulation"] = in.witness->used_penalty ? "penalty" : "lagrange";
        if (in.witness->used_penalty) w["beta"] = in.witness->beta;
        nlohmann::json unknowns = nlohmann::json::array();
        for (JetVar v : in.witness->f.unknowns)
            unknowns.push_back(jet_name(v, in.sys ? in.sys->variables : std::vector<std::string>{}));
        w["unknowns"] = unknowns;
        nlohmann::json pts = nlohmann::json::array();
        for (int i = 0; i < in.witness->n_points(); ++i) {
            nlohmann::json p;
            nlohmann::json coords = nlohmann::json::array();
            for (int k = 0; k < in.witness->points[i].size(); ++k)
                coords.push_back(in.witness->points[i](k));
            p["point"] = coords;
            p["residual"] = in.witness->residuals[i];
            p["smallest_singular_value"] = in.witness->smallest_singular[i];
            p["rank"] = in.witness->jacobian_ranks[i];
            p["component"] = in.witness->component[i];
            pts.push_back(p);
        }
        w["points"] = pts;
        w["path_failures"] = in.witness->path_failures;
        j["witness"] = w;
    }
    if (in.components) {
        nlohmann::json comps = nlohmann::json::array();
        for (const auto& comp : *in.components) {
            nlohmann::json c;
            c["component"] = comp.component_tag;
            nlohmann::json iterations = nlohmann::json::array();
            for (const auto& pass : comp.passes) {
                nlohmann::json p;
                p["n"] = pass.n;
                p["r"] = pass.r;
                p["delta_before"] = pass.delta_before;
                p["delta_after"] = pass.delta_after;
                p["used_shortcut_duals"] = pass.used_shortcut_duals;
                p["redundancy_suspected"] = pass.redundancy_suspected;
                iterations.push_back(p);
            }
            c["iterations"] = iterations;
            c["xi"] = comp.xi_used;
            c["status"] = comp.ok() ? "ok" : comp.error;
            if (comp.trajectory) {
                c["samples"] = comp.trajectory->times.size();
                if (comp.trajectory->aborted) c["aborted_at"] = comp.trajectory->abort_time;
            }
            comps.push_back(c);
        }
        j["components"] = comps;
    }
    if (in.reduced_system_text) j["reduced_system"] = *in.reduced_system_text;
    return j.dump(2) + "\n";
}

}  // namespace daeire
