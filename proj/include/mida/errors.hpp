#pragma once

#include <stdexcept>
#include <string>

namespace mida {

struct InvalidValuation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidMarket : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidSpec : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidHalving : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct GridTooCoarse : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct GridTooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct TooLarge : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The solver failed to produce a clearing allocation. Never expected for
/// gross-substitute buyers and diminishing-marginal-returns sellers.
struct NoEquilibriumFound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An outcome is not materially balanced.
struct Unbalanced : std::logic_error {
    using std::logic_error::logic_error;
};

/// A strategic guarantee (budget balance, individual rationality, material
/// balance) was breached. Always a bug.
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace mida
