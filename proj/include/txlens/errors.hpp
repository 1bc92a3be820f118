// Copyright 2026 The txlens Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace txlens {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

//! Violated precondition of a public operation
class PreconditionError : public Error {
  public:
    using Error::Error;
};

//! Missing or ill-typed field; where() is a JSON path ("$.tx.gas_limit") or field name ("risk")
class SchemaError : public Error {
  public:
    explicit SchemaError(std::string where, const std::string& detail = {})
        : Error(detail.empty() ? "schema error at " + where : "schema error at " + where + ": " + detail),
          where_(std::move(where)) {}
    [[nodiscard]] const std::string& where() const noexcept { return where_; }

  private:
    std::string where_;
};

class ValidationError : public Error {
  public:
    explicit ValidationError(std::vector<std::string> violations)
        : Error("trace validation failed: " + join(violations)), violations_(std::move(violations)) {}
    [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (const auto& s : v) {
            if (!out.empty()) out += ", ";
            out += s;
        }
        return out;
    }
    std::vector<std::string> violations_;
};

//! Network or external-tool failure; retriable
class TransportError : public Error {
  public:
    using Error::Error;
};

class TimeoutError : public TransportError {
  public:
    using TransportError::TransportError;
};

//! External tool produced output in a format no adapter understands
class AdapterError : public Error {
  public:
    using Error::Error;
};

//! Model reply contained no JSON object at all
class NoJsonError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class LoadError : public Error {
  public:
    LoadError(std::string file, std::size_t line, const std::string& detail)
        : Error(file + ":" + std::to_string(line) + ": " + detail), file_(std::move(file)), line_(line) {}
    [[nodiscard]] const std::string& file() const noexcept { return file_; }
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

  private:
    std::string file_;
    std::size_t line_;
};

class ConsensusError : public Error {
  public:
    using Error::Error;
};

}  // namespace txlens
