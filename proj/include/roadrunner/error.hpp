#pragma once

#include <cassert>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace rr {

enum class ErrorKind {
    BoundsViolation,
    GuestAbiMissing,
    FrameMalformed,
    PeerUnreachable,
    HoseUnavailable,
    Timeout,
    RegistryMiss,
    AllocationFailed,
};

const char* to_string(ErrorKind kind);

// Inverse of to_string; used when re-hydrating errors carried in ERROR frame
// payloads ("<Kind>: <detail>").
std::optional<ErrorKind> parse_error_kind(std::string_view name);

struct TransferError {
    ErrorKind kind;
    std::string detail;

    std::string to_string() const;
};

TransferError make_error(ErrorKind kind, std::string detail);

// Parses "<Kind>: <detail>" payloads back into a TransferError. Unknown kind
// names map to `fallback` with the whole payload as detail.
TransferError parse_error_payload(std::string_view payload, ErrorKind fallback);

// Value-or-error result used by every fallible operation in the library.
template <typename T>
class [[nodiscard]] Result {
public:
    Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}
    Result(TransferError err) : v_(std::in_place_index<1>, std::move(err)) {}

    bool ok() const { return v_.index() == 0; }
    explicit operator bool() const { return ok(); }

    T& value() & {
        assert(ok());
        return std::get<0>(v_);
    }
    const T& value() const& {
        assert(ok());
        return std::get<0>(v_);
    }
    T&& value() && {
        assert(ok());
        return std::get<0>(std::move(v_));
    }

    const TransferError& error() const& {
        assert(!ok());
        return std::get<1>(v_);
    }
    TransferError&& error() && {
        assert(!ok());
        return std::get<1>(std::move(v_));
    }

private:
    std::variant<T, TransferError> v_;
};

struct Unit {};

using Status = Result<Unit>;

inline Status ok_status() { return Status(Unit{}); }

}  // namespace rr
