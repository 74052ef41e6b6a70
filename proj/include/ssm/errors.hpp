// Exception hierarchy shared by all modules. Callers that need to
// distinguish failure classes catch the concrete types; everything
// derives from ssm::Error.
#pragma once

#include <stdexcept>
#include <string>

namespace ssm {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed file contents. Message carries the 1-based line number.
class ParseError : public Error {
public:
    using Error::Error;
};

// Unsupported file format or extension.
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Mesh connectivity violates what an operation requires (non-manifold
// edges, unexpected boundary structure, ...).
class TopologyError : public Error {
public:
    using Error::Error;
};

// Operation needs an open mesh but the input is closed.
class NoBoundaryError : public TopologyError {
public:
    using TopologyError::TopologyError;
};

// More boundary loops than the operation can handle.
class MultipleLoopsError : public TopologyError {
public:
    MultipleLoopsError(const std::string& msg, int loop_count_)
        : TopologyError(msg), loop_count(loop_count_) {}
    int loop_count;
};

// Shared-boundary extraction found no contact region.
class NoSharedBoundaryError : public Error {
public:
    NoSharedBoundaryError(const std::string& msg, double min_distance_)
        : Error(msg), min_distance(min_distance_) {}
    double min_distance;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Invalid user-supplied configuration (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ssm
