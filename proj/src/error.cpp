#include "hafcp/error.hpp"

namespace hafcp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorCode::UnparseableCell: return "UnparseableCell";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::CannotDropLabel: return "CannotDropLabel";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateAUC: return "DegenerateAUC";
    case ErrorCode::EmptyModel: return "EmptyModel";
    case ErrorCode::NegativeScore: return "NegativeScore";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SampleTooSmall: return "SampleTooSmall";
    case ErrorCode::SampleTooLarge: return "SampleTooLarge";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::InvalidVertices: return "InvalidVertices";
    case ErrorCode::NonpositiveWidth: return "NonpositiveWidth";
    case ErrorCode::MissingSpec: return "MissingSpec";
    case ErrorCode::NoChurnRows: return "NoChurnRows";
    case ErrorCode::MissingImportance: return "MissingImportance";
    case ErrorCode::NoPositiveImportance: return "NoPositiveImportance";
    case ErrorCode::UnknownItem: return "UnknownItem";
    case ErrorCode::EmptyDatabase: return "EmptyDatabase";
    case ErrorCode::TooManyItemsForOracle: return "TooManyItemsForOracle";
    case ErrorCode::UnresolvableItem: return "UnresolvableItem";
    case ErrorCode::LineageMismatch: return "LineageMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::MissingArtifact: return "MissingArtifact";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace hafcp
