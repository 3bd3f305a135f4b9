#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fewshot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(std::size_t pivot, double value)
        : Error("matrix is not positive definite (pivot " + std::to_string(pivot) +
                " = " + std::to_string(value) + ")"),
          pivot_(pivot) {}

    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

class NotRepairable : public Error {
public:
    using Error::Error;
};

class EmptyClass : public Error {
public:
    explicit EmptyClass(int class_index)
        : Error("class " + std::to_string(class_index) + " has no support mass"),
          class_index_(class_index) {}

    int class_index() const noexcept { return class_index_; }

private:
    int class_index_;
};

class EmptyQuery : public Error {
public:
    EmptyQuery() : Error("query set is empty") {}
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class InvalidPrior : public Error {
public:
    using Error::Error;
};

class NotEnoughClasses : public Error {
public:
    NotEnoughClasses(int requested, int available)
        : Error("task needs " + std::to_string(requested) + " classes but world has " +
                std::to_string(available)) {}
};

class StrategyHasNoScore : public Error {
public:
    StrategyHasNoScore() : Error("random acquisition has no uncertainty score") {}
};

class PoolExhausted : public Error {
public:
    PoolExhausted() : Error("no unacquired pool examples remain") {}
};

class SingularTransform : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    FormatError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace fewshot
