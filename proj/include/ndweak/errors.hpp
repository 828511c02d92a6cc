// errors.hpp — exception types shared across the library
#pragma once

#include <stdexcept>
#include <string>

namespace ndweak {

// Invalid physical parameter or non-conforming input (dimension mismatch,
// kappa_k > 2*Delta_k, empty postselection, conditioning on a null point, ...).
struct PhysicsError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Internal numerical-consistency failure (normalization drift, imaginary
// residue above tolerance, quadrature non-convergence). Signals a bug or a
// grid too coarse for the requested configuration, not a user error.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace ndweak
