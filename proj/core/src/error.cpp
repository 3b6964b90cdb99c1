#include "growthdesign/error.hpp"

namespace growthdesign {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidModel: return "invalid-model";
        case ErrorCode::Parameter: return "parameter";
        case ErrorCode::Resource: return "resource";
        case ErrorCode::Infeasible: return "infeasible";
        case ErrorCode::Certificate: return "certificate";
        case ErrorCode::Schema: return "schema";
        case ErrorCode::Usage: return "usage";
    }
    return "unknown";
}

}  // namespace growthdesign
