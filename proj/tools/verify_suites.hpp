#pragma once

#include <cstdint>
#include <ostream>

/// Finite-difference checks of the control Jacobian, the derivative of the optimality map and
/// the control derivative. Prints one line per check; true iff all pass.
bool run_gradient_suite(std::uint64_t seed, std::ostream& out);
