#include "dualmem/error.hpp"

namespace dualmem {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingField: return "MissingField";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::UnknownLink: return "UnknownLink";
        case ErrorCode::CassetteMiss: return "CassetteMiss";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::EmptyConversation: return "EmptyConversation";
        case ErrorCode::TurnExceedsBudget: return "TurnExceedsBudget";
        case ErrorCode::MalformedModelOutput: return "MalformedModelOutput";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::MalformedJudgeOutput: return "MalformedJudgeOutput";
        case ErrorCode::OutOfRangeScore: return "OutOfRangeScore";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::MissingArtifact: return "MissingArtifact";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

Error Error::with_context(std::string_view context) const {
    return Error(code_, std::string(context) + ": " + detail_);
}

void fail(ErrorCode code, const std::string& detail) {
    throw Error(code, detail);
}

}  // namespace dualmem
