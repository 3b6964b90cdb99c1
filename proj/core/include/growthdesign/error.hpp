#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace growthdesign {

enum class ErrorCode {
    InvalidModel,
    Parameter,
    Resource,
    Infeasible,
    Certificate,
    Schema,
    Usage,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace growthdesign
