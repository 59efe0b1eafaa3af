#include "rscir/error.hpp"

namespace rscir {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::Io: return "Io";
    case Errc::BadMagic: return "BadMagic";
    case Errc::HeaderParse: return "HeaderParse";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::ZeroNormRow: return "ZeroNormRow";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::ParseError: return "ParseError";
    case Errc::UnknownProtocol: return "UnknownProtocol";
    case Errc::UnknownPool: return "UnknownPool";
    case Errc::MissingField: return "MissingField";
    case Errc::InvalidRecord: return "InvalidRecord";
    case Errc::EmptyPositives: return "EmptyPositives";
    case Errc::UnresolvedImageId: return "UnresolvedImageId";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::TooShort: return "TooShort";
    case Errc::TooFewSamples: return "TooFewSamples";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::MissingComposedEntry: return "MissingComposedEntry";
    case Errc::UnknownMethod: return "UnknownMethod";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::MissingResource: return "MissingResource";
    case Errc::PositiveOutsidePool: return "PositiveOutsidePool";
    case Errc::MixedProtocols: return "MixedProtocols";
    case Errc::UnknownParam: return "UnknownParam";
  }
  return "Unknown";
}

}  // namespace rscir
