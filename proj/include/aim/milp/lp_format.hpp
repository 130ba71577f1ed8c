#ifndef AIM_MILP_LP_FORMAT_HPP
#define AIM_MILP_LP_FORMAT_HPP

#include <string>

#include "aim/milp/model.hpp"

namespace aim::milp {

/// Renders the model as a CPLEX-style LP document (Minimize / Subject To /
/// Bounds / Binary / End). Variables are named x<id>, constraints c<index>.
/// Output is deterministic: exporting the same model twice is byte-identical.
std::string export_lp_text(const MilpModel& model);

}  // namespace aim::milp

#endif  // AIM_MILP_LP_FORMAT_HPP
