#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rscir {

enum class Errc {
  // embedstore
  Io,
  BadMagic,
  HeaderParse,
  DimensionMismatch,
  DuplicateId,
  ZeroNormRow,
  NonFiniteValue,
  NotNormalized,
  ParseError,
  UnknownProtocol,
  UnknownPool,
  MissingField,
  InvalidRecord,
  EmptyPositives,
  UnresolvedImageId,
  // numerics
  NonFiniteInput,
  TooShort,
  TooFewSamples,
  NotSymmetric,
  NoConvergence,
  // simcore
  EmptyPool,
  LengthMismatch,
  KTooLarge,
  // composers
  MissingComposedEntry,
  UnknownMethod,
  InvalidConfig,
  MissingResource,
  // evalkit
  PositiveOutsidePool,
  MixedProtocols,
  UnknownParam,
};

std::string_view to_string(Errc code);

// Every failure the library reports carries one of the categories above so
// callers (and the CLI's exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace rscir
