#pragma once

#include <stdexcept>
#include <string>

namespace dirhdr {

//! Bad user input or configuration (CLI exit code 2).
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

//! Numerical failure: non-convergence, all-infinite objective, overflow (CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

//! Data carry no directional structure (resultant length ~ 0), parametric selectors blow up.
class UniformDataError : public NumericError {
public:
    explicit UniformDataError(const std::string& what) : NumericError(what) {}
};

//! A region that should be proper came out empty or covering the whole sphere (CLI exit code 4).
class DegenerateRegionError : public std::runtime_error {
public:
    explicit DegenerateRegionError(const std::string& what) : std::runtime_error(what) {}
};

//! Boundary extraction on an empty/full region.
class EmptyBoundaryError : public DegenerateRegionError {
public:
    explicit EmptyBoundaryError(const std::string& what) : DegenerateRegionError(what) {}
};

//! Set metric invoked on an empty point set.
class EmptySetError : public std::invalid_argument {
public:
    explicit EmptySetError(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace dirhdr
