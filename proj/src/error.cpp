// SPDX-License-Identifier: Apache-2.0
#include "tryonlab/error.hpp"

namespace tryonlab {

const char* error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::MissingAnnotation: return "MissingAnnotation";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::CorruptImage: return "CorruptImage";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::PartIndexOutOfRange: return "PartIndexOutOfRange";
    case ErrorCode::AnnotationUnavailable: return "AnnotationUnavailable";
    case ErrorCode::DegenerateTps: return "DegenerateTps";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::UnknownActivation: return "UnknownActivation";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DatasetError: return "DatasetError";
    case ErrorCode::NanLoss: return "NanLoss";
    case ErrorCode::LayoutMismatch: return "LayoutMismatch";
    }
    return "UnknownError";
}

std::string Error::make_what(ErrorCode code, const std::string& message,
                             const std::string& detail) {
    std::string what = std::string(error_code_name(code)) + ": " + message;
    if (!detail.empty()) {
        what += " [" + detail + "]";
    }
    return what;
}

} // namespace tryonlab
