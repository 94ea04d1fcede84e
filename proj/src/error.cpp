#include "ridgekit/error.hpp"

namespace ridgekit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::NotSymmetric: return "NotSymmetric";
        case ErrorCode::InsufficientSamples: return "InsufficientSamples";
        case ErrorCode::IllConditioned: return "IllConditioned";
        case ErrorCode::Degenerate: return "Degenerate";
        case ErrorCode::DidNotConverge: return "DidNotConverge";
        case ErrorCode::SingularWeightedSystem: return "SingularWeightedSystem";
        case ErrorCode::InvalidK: return "InvalidK";
        case ErrorCode::MissingNeighbor: return "MissingNeighbor";
        case ErrorCode::Stalls: return "Stalls";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::UnsupportedRank: return "UnsupportedRank";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

}  // namespace ridgekit
