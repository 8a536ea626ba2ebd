#pragma once

#include <stdexcept>
#include <string>

namespace wmcusum {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An input violates a documented type invariant. The CLI maps this to exit status 2.
class InvalidParameter : public Error {
public:
    using Error::Error;
};

/// Closed loop or estimator pole outside the unit circle.
class StabilityViolation : public Error {
public:
    using Error::Error;
};

/// A Riccati solve produced no admissible root.
class InternalConsistencyError : public Error {
public:
    using Error::Error;
};

/// Simulated state left the representable range in a regime where it must stay bounded.
class NumericalDivergence : public Error {
public:
    using Error::Error;
};

class TraceTooShort : public Error {
public:
    using Error::Error;
};

/// Every Monte Carlo run was censored at the horizon.
class AllRunsFailed : public Error {
public:
    using Error::Error;
};

} // namespace wmcusum
