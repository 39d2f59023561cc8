#pragma once

#include <stdexcept>
#include <string>

namespace tcdarp {

// Malformed input file (not valid JSON / wrong shape).
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally valid input that violates a model invariant.
// `path` points at the offending field, e.g. "users[u-003].pickup_am".
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string path, const std::string& msg)
        : std::runtime_error(path + ": " + msg), path(std::move(path)) {}
    std::string path;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Oracle input exceeds its enumeration limit.
class SizeLimitError : public std::runtime_error {
public:
    explicit SizeLimitError(const std::string& msg) : std::runtime_error(msg) {}
};

// The route pool has no route serving some request.
class UncoveredRequestError : public std::runtime_error {
public:
    UncoveredRequestError(std::string user_id, std::string period_name)
        : std::runtime_error("no pool route serves user " + user_id + " in " + period_name),
          user(std::move(user_id)), period(std::move(period_name)) {}
    std::string user;
    std::string period;
};

// A plan is missing the service of an attended request.
class MissingServiceError : public std::runtime_error {
public:
    MissingServiceError(std::string user_id, std::string period_name)
        : std::runtime_error("user " + user_id + " is not served in " + period_name),
          user(std::move(user_id)), period(std::move(period_name)) {}
    std::string user;
    std::string period;
};

} // namespace tcdarp
