#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cdc {

enum class Errc {
    MagicMismatch,
    VersionUnsupported,
    TruncatedFile,
    NonFiniteWeight,
    DuplicateLayer,
    IoFailure,
    InvalidArgument,
    ShapeMismatch,
    EmptyInput,
    EmptyHistogram,
    UnknownSymbol,
    CorruptStream,
    IndexOutOfRange,
    ChecksumMismatch,
    SizeExceeded,
    InvalidConfig,
};

std::string_view errc_name(Errc code) noexcept;

/// Single exception type for the library; `code()` carries the failure class.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace cdc
