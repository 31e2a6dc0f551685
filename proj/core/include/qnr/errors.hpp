#pragma once

#include <stdexcept>
#include <string>

namespace qnr {

/// Argument outside the mathematical domain of an operation (even modulus,
/// eps <= 0, composite p, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Index or bound beyond what a PrimeTable holds.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Memory budget, 64-bit overflow or a capped search was hit.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller-supplied contract is missing or violated (e.g. growth certificate).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Reading or writing an external file failed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qnr
