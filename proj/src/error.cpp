#include "cdc/error.hpp"

namespace cdc {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::MagicMismatch: return "MagicMismatch";
        case Errc::VersionUnsupported: return "VersionUnsupported";
        case Errc::TruncatedFile: return "TruncatedFile";
        case Errc::NonFiniteWeight: return "NonFiniteWeight";
        case Errc::DuplicateLayer: return "DuplicateLayer";
        case Errc::IoFailure: return "IoFailure";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::EmptyHistogram: return "EmptyHistogram";
        case Errc::UnknownSymbol: return "UnknownSymbol";
        case Errc::CorruptStream: return "CorruptStream";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::ChecksumMismatch: return "ChecksumMismatch";
        case Errc::SizeExceeded: return "SizeExceeded";
        case Errc::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

}  // namespace cdc
