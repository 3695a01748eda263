#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ocfs {

enum class Errc {
    InvalidArgument,
    MalformedCsv,
    EmptyData,
    NonNumericCell,
    UnknownParam,
    EmptySelection,
    DimMismatch,
    DegenerateData,
    EmptyColumn,
    KOutOfRange,
    KTooLarge,
    IterationOutOfRange,
    TooFewMethods,
    InsufficientRows,
    SpecInvalid,
    MissingLabels,
    MalformedModel,
    Io,
};

constexpr std::string_view errc_name(Errc c) noexcept {
    switch (c) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::MalformedCsv: return "MalformedCsv";
        case Errc::EmptyData: return "EmptyData";
        case Errc::NonNumericCell: return "NonNumericCell";
        case Errc::UnknownParam: return "UnknownParam";
        case Errc::EmptySelection: return "EmptySelection";
        case Errc::DimMismatch: return "DimMismatch";
        case Errc::DegenerateData: return "DegenerateData";
        case Errc::EmptyColumn: return "EmptyColumn";
        case Errc::KOutOfRange: return "KOutOfRange";
        case Errc::KTooLarge: return "KTooLarge";
        case Errc::IterationOutOfRange: return "IterationOutOfRange";
        case Errc::TooFewMethods: return "TooFewMethods";
        case Errc::InsufficientRows: return "InsufficientRows";
        case Errc::SpecInvalid: return "SpecInvalid";
        case Errc::MissingLabels: return "MissingLabels";
        case Errc::MalformedModel: return "MalformedModel";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

// Errors caused by the caller's arguments, as opposed to the data or the
// environment. The CLI maps these to exit code 1.
constexpr bool is_validation_error(Errc c) noexcept {
    switch (c) {
        case Errc::InvalidArgument:
        case Errc::UnknownParam:
        case Errc::KOutOfRange:
        case Errc::KTooLarge:
        case Errc::IterationOutOfRange:
        case Errc::TooFewMethods:
        case Errc::SpecInvalid:
            return true;
        default:
            return false;
    }
}

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what)
      , code_{code} {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Errc code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace ocfs
