#pragma once

#include <stdexcept>
#include <string>

namespace toruslab {

// Invalid experiment configuration (schema violation, amplitude budget, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// An operation was called outside its documented preconditions.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The sampled planar region is too small for the requested query.
class RegionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical construction could not be stabilised (reported, exit code 3).
class InstabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace toruslab
