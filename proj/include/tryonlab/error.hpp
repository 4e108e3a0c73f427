// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace tryonlab {

enum class ErrorCode {
    MissingAnnotation,
    EmptyDataset,
    CorruptImage,
    IndexOutOfRange,
    IoFailure,
    PartIndexOutOfRange,
    AnnotationUnavailable,
    DegenerateTps,
    ConfigInvalid,
    ShapeMismatch,
    UnknownActivation,
    ImageTooSmall,
    EmptyInput,
    DatasetError,
    NanLoss,
    LayoutMismatch,
};

const char* error_code_name(ErrorCode code);

/// Single exception type for all domain errors; `code` identifies the
/// contract that was violated, `detail` carries the offending id/path.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message, std::string detail = {})
        : std::runtime_error(make_what(code, message, detail)),
          code_(code),
          detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    static std::string make_what(ErrorCode code, const std::string& message,
                                 const std::string& detail);
    ErrorCode code_;
    std::string detail_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message,
                               const std::string& detail = {}) {
    throw Error(code, message, detail);
}

} // namespace tryonlab
