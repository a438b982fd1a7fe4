#pragma once

#include <optional>
#include <string>

#include "daeire/dae_system.hpp"
#include "daeire/solver.hpp"

namespace daeire {

/// Header `t,<var names...>,component`, one row per time, reals with 15
/// significant digits.
std::string emit_trajectory_csv(const Trajectory& traj);

/// Versioned report covering every stage that ran: signature matrix, offsets,
/// delta, per-witness-point data, the reduction pass ledger and termination
/// status.
struct ReportInput {
    const DaeSystem* sys = nullptr;
    const SignatureMatrix* sigma = nullptr;
    const StructuralSolution* structural = nullptr;
    const WitnessSet* witness = nullptr;
    const std::vector<ComponentResult>* components = nullptr;
    std::uint64_t seed = 0;
    std::string status = "ok";
    std::optional<std::string> reduced_system_text;
};

std::string emit_report_json(const ReportInput& in);

std::string format_real(double v);  // 15 significant digits

}  // namespace daeire
