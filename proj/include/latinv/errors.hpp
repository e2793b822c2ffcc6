#pragma once

#include <stdexcept>
#include <string>

namespace latinv {

// Raised when an exact integer computation would leave the representable
// range. Exact paths never wrap silently.
class OverflowError : public std::runtime_error {
public:
    explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a transform's source sample does not cover the requested
// target box.
class CoverageError : public std::runtime_error {
public:
    explicit CoverageError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a statistical routine cannot run (empty admissible set,
// insufficient counts, box too small).
class StatError : public std::runtime_error {
public:
    explicit StatError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace latinv
