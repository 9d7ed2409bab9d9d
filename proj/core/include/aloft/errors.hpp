#ifndef ALOFT_ERRORS_HPP
#define ALOFT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace aloft {

// Invalid arguments or configuration (bad grid, wrong dimensions, ...).
// The CLI maps this to exit code 2.
class UsageError : public std::invalid_argument {
public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed or unusable input data. Exit code 3.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical degeneracy detected at run time (vanishing kernel density,
// non-finite model values, failed bootstrap replicate). Exit code 4.
class DegeneracyError : public std::runtime_error {
public:
  explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace aloft

#endif
