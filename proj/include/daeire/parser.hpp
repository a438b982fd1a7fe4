#pragma once

#include <string>
#include <vector>

#include "daeire/dae_system.hpp"

namespace daeire {

/// Parse the model DSL:
///   var x, y;
///   param R1 = 1000;
///   interval 0 .. 1;
///   2*y*x'' - x*y'' + 2*x*x'^2 - x' + sin(t) = 0;
/// Derivatives are written with primes or diff(x, t, k); functions are
/// sin, cos, tanh, exp; ^ takes a nonnegative integer exponent.
DaeSystem parse_model(const std::string& text);

/// JSON alternative with the same fields; equations are DSL expressions.
DaeSystem parse_model_json(const std::string& text);

/// Dispatch on leading '{' between the DSL and the JSON form.
DaeSystem parse_model_auto(const std::string& text);

/// Parse a single expression against a fixed variable list (no parameters).
Expr parse_expression(const std::string& text, const std::vector<std::string>& variables);

/// Render a system back to DSL text; parsing the output reproduces the same
/// expression trees.
std::string print_model(const DaeSystem& sys);

}  // namespace daeire
