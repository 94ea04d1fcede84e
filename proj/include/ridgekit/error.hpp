#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ridgekit {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    RankDeficient,
    NotSymmetric,
    InsufficientSamples,
    IllConditioned,
    Degenerate,
    DidNotConverge,
    SingularWeightedSystem,
    InvalidK,
    MissingNeighbor,
    Stalls,
    ZeroVariance,
    UnsupportedRank,
    Io,
    Parse,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI) can map it onto a recovery path or an exit status.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

}  // namespace ridgekit
