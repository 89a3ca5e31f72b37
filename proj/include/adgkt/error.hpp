#pragma once

#include <stdexcept>
#include <string>

namespace adgkt {

/// Shape disagreement between operands.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A class label or index outside its valid range.
class IndexError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Invalid configuration value, raised before any compute starts.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dataset content that cannot satisfy an operation (too few samples, empty split).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Batches with too few samples or mismatched sample counts.
class SampleCountError : public DataError {
public:
    using DataError::DataError;
};

/// Malformed input file. The message names the offending line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A metric that is undefined for the given confusion matrix.
class MetricError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace adgkt
