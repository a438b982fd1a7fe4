#pragma once

#include <map>
#include <string>
#include <vector>

#include "daeire/expr.hpp"

namespace daeire {

/// A square (or to-be-validated) system F(t, x, x', ..., x^(l)) = 0 together
/// with its integration window. Parameters are folded into the equation
/// trees at parse time and kept here for reporting only.
struct DaeSystem {
    std::vector<std::string> variables;
    std::vector<Expr> equations;
    std::map<std::string, double> parameters;
    double t0 = 0.0;
    double t_end = 1.0;

    int n_vars() const { return int(variables.size()); }
    int n_eqs() const { return int(equations.size()); }
};

/// ok iff #equations == #variables; degenerate empty systems are rejected.
void validate_square(const DaeSystem& sys);

/// One per-component numerical solution sampled on an ascending time grid.
struct Trajectory {
    std::vector<std::string> variables;  // original variable names only
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // row i matches times[i]
    int component_tag = 0;
    bool aborted = false;     // hit a singular Jacobian mid-run
    double abort_time = 0.0;  // valid when aborted
};

}  // namespace daeire
