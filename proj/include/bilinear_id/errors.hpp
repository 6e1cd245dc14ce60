#ifndef BILINEAR_ID_ERRORS_HPP
#define BILINEAR_ID_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bilinear_id {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Dimension mismatch or element-count overflow.
class SizeError : public Error {
public:
    using Error::Error;
};

/// Argument outside its admissible range (nonpositive std, zero matrix, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Least-squares design is numerically rank deficient.
class RankError : public Error {
public:
    RankError(const std::string& what, std::size_t rank, std::size_t cols)
        : Error(what), rank_(rank), cols_(cols) {}

    std::size_t rank() const noexcept { return rank_; }
    std::size_t cols() const noexcept { return cols_; }

private:
    std::size_t rank_;
    std::size_t cols_;
};

/// Fewer regression rows than unknowns.
class UnderdeterminedError : public RankError {
public:
    using RankError::RankError;
};

/// No input standard deviation keeps the system mean-square stable.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Not enough data points (rate fitting, conditional Monte Carlo).
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// Malformed text input (system files, trajectory CSV, config files).
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace bilinear_id

#endif  // BILINEAR_ID_ERRORS_HPP
