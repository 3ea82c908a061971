#pragma once

#include <stdexcept>
#include <string>

namespace ldlif {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument is outside its documented domain.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Vector or matrix dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A file does not follow its binary or text layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Well-formed data violates a content rule (ordering, ranges).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An operation needs state that was not retained.
class StateError : public Error {
public:
    using Error::Error;
};

/// A caller broke a numeric precondition (e.g. MAC sum outside its range).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite loss.
class TrainingError : public Error {
public:
    TrainingError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace ldlif
