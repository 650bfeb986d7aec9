#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msite {

enum class ErrorCode {
    // core-model
    MalformedLine,
    NoValidRecords,
    InvalidWindow,
    // place-inference
    InvalidParams,
    NoHome,
    // conversation-inference
    MixedWindow,
    UnsortedInput,
    // context-engine
    MissingCorrection,
    // ema-engine
    InactiveParticipant,
    CategoryMismatch,
    WrongNode,
    ValueOutOfDomain,
    SessionExpired,
    InvalidScript,
    // message-bank
    EmptyText,
    EmptyGenericPool,
    // engagement
    BadParentLevel,
    CompleteBeforePlan,
    RatingOutOfDomain,
    AlreadyCompleted,
    NotAStep,
    // service
    UnknownParticipant,
    UnknownSession,
    UnknownTarget,
    AlreadyEnrolled,
    InvalidConfig,
    InvalidRequest,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Domain error carrying a stable code; the HTTP layer maps codes to statuses.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}
    explicit Error(ErrorCode code) : std::runtime_error(std::string(to_string(code))), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace msite
