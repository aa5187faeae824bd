#pragma once

#include <stdexcept>
#include <string>

namespace pmme {

// Bad input: wrong shapes, invalid states, out-of-range parameters.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A computation ran but failed one of its numerical tolerance checks.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pmme
