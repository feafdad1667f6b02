#pragma once

#include <stdexcept>
#include <string>

namespace llmmcts {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Action applied in a state where its preconditions do not hold.
class PreconditionViolated : public Error {
 public:
  PreconditionViolated(std::string action, std::string reason)
      : Error("precondition violated for '" + action + "': " + reason),
        action_(std::move(action)),
        reason_(std::move(reason)) {}

  const std::string& action() const noexcept { return action_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string action_;
  std::string reason_;
};

class SceneFormatError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ZeroVector : public Error {
 public:
  using Error::Error;
};

class GoalParseFailure : public Error {
 public:
  using Error::Error;
};

class PoolExhausted : public Error {
 public:
  using Error::Error;
};

class NoSimulationsCompleted : public Error {
 public:
  using Error::Error;
};

// Base for every failure raised by a commonsense provider. Callers that
// draw M samples treat one of these as "no sample" and keep going.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, std::string prompt_hash)
      : Error(what + " [prompt " + prompt_hash + "]"),
        prompt_hash_(std::move(prompt_hash)) {}

  const std::string& prompt_hash() const noexcept { return prompt_hash_; }

 private:
  std::string prompt_hash_;
};

class ReplayMiss : public ProviderError {
 public:
  explicit ReplayMiss(std::string prompt_hash)
      : ProviderError("no recorded fixture in replay-only mode",
                      std::move(prompt_hash)) {}
};

class ProviderTimeout : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class HttpError : public ProviderError {
 public:
  HttpError(int status, const std::string& what, std::string prompt_hash)
      : ProviderError("HTTP " + std::to_string(status) + ": " + what,
                      std::move(prompt_hash)),
        status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

// Too many consecutive provider failures; a live run should checkpoint and stop.
class ProviderOutage : public Error {
 public:
  using Error::Error;
};

}  // namespace llmmcts
