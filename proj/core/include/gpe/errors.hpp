#pragma once

#include <stdexcept>
#include <string>

namespace gpe {

/// Bad user input: files, flags, malformed data, violated preconditions.
class input_error : public std::runtime_error {
public:
    explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: singular systems, rank deficiency, unusable fits.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpe
