#pragma once

#include <stdexcept>
#include <string>

namespace gol {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input: bad arguments, unparseable files, schema violations.
class ParseError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(int epoch, long step)
        : Error("divergence at epoch " + std::to_string(epoch) + ", step " + std::to_string(step)),
          epoch_(epoch), step_(step) {}

    int epoch() const noexcept { return epoch_; }
    long step() const noexcept { return step_; }

private:
    int epoch_;
    long step_;
};

}  // namespace gol
