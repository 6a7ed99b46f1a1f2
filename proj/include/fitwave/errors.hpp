#pragma once

#include <stdexcept>
#include <string>

namespace fitwave {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter set violates the model's constraints (e.g. mu >= s).
struct InvalidParams : Error {
    using Error::Error;
};

// An event was applied whose preconditions do not hold (empty source type).
struct InvalidEvent : Error {
    using Error::Error;
};

// Every occupied type has fitness zero, so no parent can be chosen.
// Unreachable from a consistent state (the fittest occupied type always has
// weight >= 1), but detected and reported rather than silently divided by.
struct DegeneratePopulation : Error {
    using Error::Error;
};

// Grid step does not divide the unit interval exactly.
struct InvalidGrid : Error {
    using Error::Error;
};

// A diagnostic needs the dense event log but the trajectory was recorded
// with snapshots only.
struct InsufficientResolution : Error {
    using Error::Error;
};

// Query time outside the recorded range of a trajectory.
struct QueryOutOfRange : Error {
    using Error::Error;
};

// Quadratic fit requested with fewer than three usable type counts.
struct TooFewTypes : Error {
    using Error::Error;
};

// Malformed configuration file or invalid option combination.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace fitwave
