#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dualmem {

enum class ErrorCode {
    MissingField,
    SchemaViolation,
    IoError,
    InvalidConfig,
    UnknownLink,
    CassetteMiss,
    TransportError,
    BudgetExceeded,
    EmptyConversation,
    TurnExceedsBudget,
    MalformedModelOutput,
    DimensionMismatch,
    ZeroVector,
    EmptyGroundTruth,
    EmptyInput,
    MalformedJudgeOutput,
    OutOfRangeScore,
    LengthMismatch,
    ZeroVariance,
    MissingArtifact,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library is an Error; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

    // Same code, message prefixed with extra context ("step 3: ...").
    Error with_context(std::string_view context) const;

private:
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

}  // namespace dualmem
