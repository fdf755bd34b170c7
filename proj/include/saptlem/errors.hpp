#pragma once

#include <stdexcept>
#include <string>

namespace saptlem {

/** Base class for all library errors; `what()` carries a human-readable message. */
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/** Invalid configuration value or combination (maps to CLI exit code 2). */
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/** Structurally impossible numeric configuration (bad ladder size, etc.). */
class InvalidConfig : public ConfigError {
public:
    explicit InvalidConfig(const std::string& msg) : ConfigError(msg) {}
};

/** File-system or format failure while reading/writing artifacts (CLI exit code 3). */
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

/** An elevation became non-finite during a simulation step. */
class NumericalOverflow : public Error {
public:
    explicit NumericalOverflow(const std::string& msg) : Error(msg) {}
};

/** Paired inputs disagree in shape. */
class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

/** Chain history too short to form a sample covariance. */
class InsufficientHistory : public Error {
public:
    explicit InsufficientHistory(const std::string& msg) : Error(msg) {}
};

/** Cholesky factorization hit a non-positive pivot (matrix not positive definite). */
class FactorizationFailure : public Error {
public:
    explicit FactorizationFailure(const std::string& msg) : Error(msg) {}
};

/** Pseudo-likelihood requested before the network was trained. */
class SurrogateNotReady : public Error {
public:
    explicit SurrogateNotReady(const std::string& msg) : Error(msg) {}
};

/** Training requested on an empty dataset. */
class EmptyDataset : public Error {
public:
    explicit EmptyDataset(const std::string& msg) : Error(msg) {}
};

/** Unrecognized synthetic problem kind. */
class UnknownKind : public ConfigError {
public:
    explicit UnknownKind(const std::string& msg) : ConfigError(msg) {}
};

/** Within-chain variance is zero; the PSRF ratio is undefined. */
class DegenerateChains : public Error {
public:
    explicit DegenerateChains(const std::string& msg) : Error(msg) {}
};

/** Fewer run directories than the diagnostic needs. */
class InsufficientRuns : public ConfigError {
public:
    explicit InsufficientRuns(const std::string& msg) : ConfigError(msg) {}
};

/** No post-burn-in samples to summarize. */
class EmptyPosterior : public Error {
public:
    explicit EmptyPosterior(const std::string& msg) : Error(msg) {}
};

/** Paired series have different lengths. */
class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& msg) : Error(msg) {}
};

} // namespace saptlem
