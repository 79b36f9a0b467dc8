#pragma once

#include <stdexcept>
#include <string>

namespace misalign {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated precondition or shape mismatch (caller bug).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

// Invalid or inconsistent configuration. Carries the offending field path
// ("sweep.epsilons[2]") when known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg, std::string field_path = "")
        : Error(field_path.empty() ? msg : field_path + ": " + msg),
          field_path_(std::move(field_path)) {}
    const std::string& field_path() const { return field_path_; }

private:
    std::string field_path_;
};

// File read/write failure. Carries the path.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg, std::string path = "")
        : Error(path.empty() ? msg : msg + ": " + path), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

// Requested operation is not available for the given setup
// (e.g. a gradient-based attack against a scripted victim).
class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& msg) : Error(msg) {}
};

}  // namespace misalign
