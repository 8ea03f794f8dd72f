#pragma once

#include <stdexcept>
#include <string>

namespace sqsk {

// Malformed or out-of-contract input (bad dimensions, bad files, bad flags).
class InputError : public std::invalid_argument
{
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical kernel could not produce a trustworthy answer
// (singular system, indefinite Gram matrix, ...).
class NumericalError : public std::runtime_error
{
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace sqsk
