#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chestnet {

// Base for everything this library throws on contract violations.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/layer dimensions do not line up.
struct ShapeError : Error {
    using Error::Error;
};

// An argument is outside its documented domain (rate, axis, label id, ...).
struct ValueError : Error {
    using Error::Error;
};

// Corpus, image, or manifest problems.
struct DataError : Error {
    using Error::Error;
};

// Training produced a non-finite value; carries the offending iteration.
struct NumericError : Error {
    explicit NumericError(std::uint64_t iter, const std::string& what)
        : Error(what), iteration(iter) {}
    std::uint64_t iteration;
};

// Checkpoint I/O failures, one distinct kind per failure mode.
struct CheckpointError : Error {
    enum class Kind {
        open_failed,
        bad_magic,
        bad_version,
        truncated,
        malformed,
        shape_mismatch,
        spec_mismatch,
    };

    CheckpointError(Kind k, const std::string& what) : Error(what), kind(k) {}
    Kind kind;
};

} // namespace chestnet
