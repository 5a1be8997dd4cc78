#pragma once

#include <istream>
#include <ostream>
#include <string>

#include "nmvm/model.hpp"

namespace nmvm {

/// Text model format, one keyword per line, '#' starts a comment:
///
///   nmvm-model 1
///   dimension 2
///   mu 0.001 0.002
///   gamma 0.0005 -0.0001
///   sigma
///   0.0004 0.0001
///   0.0001 0.0009
///   mixing gig
///   lambda -0.5
///   chi 1
///   psi 1
///
/// Families and their parameters: gig (lambda, chi, psi), gamma (shape, rate),
/// inverse_gaussian (delta, gamma), exponential, degenerate. Reals are
/// written with 17 significant digits so a save/load round trip is exact.
inline constexpr int kModelSchemaVersion = 1;

void write_model(std::ostream& out, const NmvmModel& model);
NmvmModel read_model(std::istream& in);

void save_model(const std::string& path, const NmvmModel& model);
NmvmModel load_model(const std::string& path);

}  // namespace nmvm
