#pragma once

#include <stdexcept>
#include <string>

namespace bcas {

/// Base class for all harness errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// budget
struct BudgetViolation : Error { using Error::Error; };

// trajectory engine
struct MalformedAction : Error { using Error::Error; };
struct UnknownTemplate : Error { using Error::Error; };

// model backend
struct BackendUnavailable : Error { using Error::Error; };
struct TraceExhausted : Error { using Error::Error; };
struct PredicateMismatch : Error { using Error::Error; };
struct CorruptLog : Error { using Error::Error; };

// retrieval
struct EmptyQuery : Error { using Error::Error; };
struct UnknownCollection : Error { using Error::Error; };
struct EmbeddingUnavailable : Error { using Error::Error; };
struct RerankerUnavailable : Error { using Error::Error; };

// datasets
struct SchemaError : Error { using Error::Error; };
struct MissingField : Error { using Error::Error; };
struct InsufficientSamples : Error { using Error::Error; };

// grading
struct UnparseableVerdict : Error { using Error::Error; };

// stats / telemetry
struct DomainError : Error { using Error::Error; };
struct SampleSetMismatch : Error { using Error::Error; };
struct NoGradedSamples : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// configuration
struct ConfigError : Error { using Error::Error; };

} // namespace bcas
