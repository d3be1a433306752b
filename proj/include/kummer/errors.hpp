#pragma once

#include <stdexcept>
#include <string>

namespace kummer {

// Invalid input: bad parameters, broken invariants, malformed documents.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// A numerical procedure did not reach its target accuracy.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string code, const std::string& message, double estimate = 0.0)
        : std::runtime_error(message), code_(std::move(code)), estimate_(estimate) {}
    const std::string& code() const { return code_; }
    double estimate() const { return estimate_; }

private:
    std::string code_;
    double estimate_;
};

} // namespace kummer
