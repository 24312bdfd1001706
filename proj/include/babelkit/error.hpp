#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace babelkit {

// Maps onto the CLI exit-code contract: Io -> 1, Validation -> 2, Verification -> 3.
enum class ErrorKind { Io, Validation, Verification };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error io_error(const std::string& message) { return {ErrorKind::Io, message}; }
inline Error validation_error(const std::string& message) { return {ErrorKind::Validation, message}; }

// Validation failure that carries every violation found, not just the first.
class ValidationErrors : public Error {
public:
    explicit ValidationErrors(std::vector<std::string> violations)
        : Error(ErrorKind::Validation, join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> violations_;
};

}  // namespace babelkit
