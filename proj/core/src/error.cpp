#include "msite/error.hpp"

namespace msite {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::MalformedLine: return "MalformedLine";
        case ErrorCode::NoValidRecords: return "NoValidRecords";
        case ErrorCode::InvalidWindow: return "InvalidWindow";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::NoHome: return "NoHome";
        case ErrorCode::MixedWindow: return "MixedWindow";
        case ErrorCode::UnsortedInput: return "UnsortedInput";
        case ErrorCode::MissingCorrection: return "MissingCorrection";
        case ErrorCode::InactiveParticipant: return "InactiveParticipant";
        case ErrorCode::CategoryMismatch: return "CategoryMismatch";
        case ErrorCode::WrongNode: return "WrongNode";
        case ErrorCode::ValueOutOfDomain: return "ValueOutOfDomain";
        case ErrorCode::SessionExpired: return "SessionExpired";
        case ErrorCode::InvalidScript: return "InvalidScript";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::EmptyGenericPool: return "EmptyGenericPool";
        case ErrorCode::BadParentLevel: return "BadParentLevel";
        case ErrorCode::CompleteBeforePlan: return "CompleteBeforePlan";
        case ErrorCode::RatingOutOfDomain: return "RatingOutOfDomain";
        case ErrorCode::AlreadyCompleted: return "AlreadyCompleted";
        case ErrorCode::NotAStep: return "NotAStep";
        case ErrorCode::UnknownParticipant: return "UnknownParticipant";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::UnknownTarget: return "UnknownTarget";
        case ErrorCode::AlreadyEnrolled: return "AlreadyEnrolled";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::InvalidRequest: return "InvalidRequest";
    }
    return "Unknown";
}

}  // namespace msite
