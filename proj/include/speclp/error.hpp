#pragma once

#include <stdexcept>
#include <string>

namespace speclp {

// Base of every error thrown by the library. Callers that only care about
// "something went wrong in speclp" catch this one.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

// A symbol returned a non-finite value.
class SymbolEvalError : public Error {
public:
    using Error::Error;
};

// A multiplier was non-finite somewhere on the frequency lattice.
class MultiplierError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public Error {
public:
    using Error::Error;
};

// Numerical audit could not be carried out as requested (step underflow,
// window too short, unresolved shift, ...).
class AuditError : public Error {
public:
    using Error::Error;
};

class WindowError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace speclp
