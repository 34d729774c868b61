#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace facegraph {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InvalidEmbedding : public Error {
public:
    using Error::Error;
};

class IoFailure : public Error {
public:
    using Error::Error;
};

/// A manifest (or other line-delimited input) record failed validation.
class MalformedRecord : public Error {
public:
    MalformedRecord(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UntrainedIndex : public Error {
public:
    using Error::Error;
};

class InsufficientTrainingData : public Error {
public:
    using Error::Error;
};

class EmptyGraph : public Error {
public:
    using Error::Error;
};

class UnknownImage : public Error {
public:
    using Error::Error;
};

class InfeasibleSpec : public Error {
public:
    using Error::Error;
};

}  // namespace facegraph
