#include "roadrunner/error.hpp"

namespace rr {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::BoundsViolation: return "BoundsViolation";
    case ErrorKind::GuestAbiMissing: return "GuestAbiMissing";
    case ErrorKind::FrameMalformed: return "FrameMalformed";
    case ErrorKind::PeerUnreachable: return "PeerUnreachable";
    case ErrorKind::HoseUnavailable: return "HoseUnavailable";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::RegistryMiss: return "RegistryMiss";
    case ErrorKind::AllocationFailed: return "AllocationFailed";
    }
    return "UnknownError";
}

std::optional<ErrorKind> parse_error_kind(std::string_view name) {
    static constexpr ErrorKind kinds[] = {
        ErrorKind::BoundsViolation, ErrorKind::GuestAbiMissing,
        ErrorKind::FrameMalformed,  ErrorKind::PeerUnreachable,
        ErrorKind::HoseUnavailable, ErrorKind::Timeout,
        ErrorKind::RegistryMiss,    ErrorKind::AllocationFailed,
    };
    for (ErrorKind k : kinds) {
        if (name == to_string(k)) return k;
    }
    return std::nullopt;
}

std::string TransferError::to_string() const {
    std::string out = rr::to_string(kind);
    out += ": ";
    out += detail;
    return out;
}

TransferError make_error(ErrorKind kind, std::string detail) {
    return TransferError{kind, std::move(detail)};
}

TransferError parse_error_payload(std::string_view payload, ErrorKind fallback) {
    auto colon = payload.find(": ");
    if (colon != std::string_view::npos) {
        if (auto kind = parse_error_kind(payload.substr(0, colon))) {
            return TransferError{*kind, std::string(payload.substr(colon + 2))};
        }
    }
    return TransferError{fallback, std::string(payload)};
}

}  // namespace rr
