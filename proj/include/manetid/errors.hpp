#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace manetid {

// All failures carry a stable machine-readable name next to the human
// message; the CLI prints both so scripts can match on the name.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(name + ": " + message), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& message) : Error("ConfigInvalid", message) {}
};

struct IoError : Error {
    explicit IoError(const std::string& message) : Error("IoFailure", message) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& message) : Error("DimensionMismatch", message) {}
};

struct EmptyInput : Error {
    explicit EmptyInput(const std::string& message) : Error("EmptyInput", message) {}
};

struct LengthMismatch : Error {
    explicit LengthMismatch(const std::string& message) : Error("LengthMismatch", message) {}
};

}  // namespace manetid
