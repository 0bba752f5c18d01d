#ifndef PROOFRL_ERRORS_HPP_
#define PROOFRL_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace proofrl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// core / proof
struct EmptyTrajectory : Error { using Error::Error; };
struct UnknownNode : Error { using Error::Error; };

// synth
struct ConfigInvalid : Error { using Error::Error; };
struct TooFewPremises : Error { using Error::Error; };
struct IllegalPremise : Error { using Error::Error; };

// align
struct UniverseMismatch : Error { using Error::Error; };
struct InconsistentInputs : Error { using Error::Error; };

// returns
struct RewardsMissing : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };

// policy
struct ActionPruned : Error { using Error::Error; };

// trainer
struct EmptyDataset : Error { using Error::Error; };
struct EmptyBuffer : Error { using Error::Error; };
struct NonFiniteLoss : Error { using Error::Error; };

// metrics
struct AlignmentMissing : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct GraphTooLarge : Error { using Error::Error; };

// ingest
struct IoError : Error { using Error::Error; };
struct UnknownId : Error { using Error::Error; };

struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error("parse error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": " + what),
        line(line),
        column(column) {}
  std::size_t line;
  std::size_t column;
};

}  // namespace proofrl

#endif  // PROOFRL_ERRORS_HPP_
