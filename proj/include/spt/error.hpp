#pragma once

#include <stdexcept>
#include <string>

namespace spt {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Invalid configuration or input data (datasets, config files, checkpoints).
class ConfigError : public Error {
public:
    using Error::Error;
};

class ValidationError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Anything that went wrong while talking to a model backend.
class BackendError : public Error {
public:
    using Error::Error;
};

class TransportError : public BackendError {
public:
    using BackendError::BackendError;
};

class ProviderError : public BackendError {
public:
    ProviderError(int status, std::string body)
        : BackendError("provider returned HTTP " + std::to_string(status) + ": " + body),
          status_(status),
          body_(std::move(body)) {}

    int status() const noexcept { return status_; }
    const std::string& body() const noexcept { return body_; }

private:
    int status_;
    std::string body_;
};

// Scripted mock has no entry for a request and no default.
class MockMissError : public BackendError {
public:
    using BackendError::BackendError;
};

class UnparseableAnswerError : public Error {
public:
    using Error::Error;
};

class EmptyPromptError : public Error {
public:
    using Error::Error;
};

class AllCandidatesFailedError : public Error {
public:
    using Error::Error;
};

}  // namespace spt
