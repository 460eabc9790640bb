#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hafcp {

enum class ErrorCode {
  // dataset
  MissingLabelColumn,
  UnparseableCell,
  MissingValue,
  EmptyDataset,
  DatasetTooSmall,
  UnknownColumn,
  CannotDropLabel,
  // gbdt
  SingleClassTraining,
  EmptyTrainingSet,
  SchemaMismatch,
  LengthMismatch,
  DegenerateAUC,
  EmptyModel,
  NegativeScore,
  ParseError,
  // fuzzify
  SampleTooSmall,
  SampleTooLarge,
  ZeroVariance,
  DegenerateColumn,
  InvalidVertices,
  NonpositiveWidth,
  MissingSpec,
  // miner
  NoChurnRows,
  MissingImportance,
  NoPositiveImportance,
  UnknownItem,
  EmptyDatabase,
  TooManyItemsForOracle,
  // augment / pipeline
  UnresolvableItem,
  LineageMismatch,
  InvalidConfig,
  MissingArtifact,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// All library failures are reported through this type; `code()` identifies
/// the failure and `what()` carries the human-readable context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hafcp
