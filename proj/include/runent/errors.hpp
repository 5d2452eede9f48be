#pragma once

#include <stdexcept>
#include <string>

namespace runent {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// ---- trace parsing / balancing ----

class MalformedLine : public Error {
public:
    MalformedLine(int line, const std::string& detail)
        : Error("line " + std::to_string(line) + ": " + detail), line_no(line) {}
    int line_no;
};

class NonMonotonicTimestamp : public Error {
public:
    explicit NonMonotonicTimestamp(int line)
        : Error("line " + std::to_string(line) + ": timestamp decreases"), line_no(line) {}
    int line_no;
};

class UnbalancedTrace : public Error {
public:
    explicit UnbalancedTrace(const std::string& detail) : Error("unbalanced trace: " + detail) {}
};

// ---- entropy ----

class DegenerateTrace : public Error {
public:
    explicit DegenerateTrace(const std::string& detail) : Error("degenerate trace: " + detail) {}
};

// ---- dataset ----

class MinorityTooSmall : public Error {
public:
    explicit MinorityTooSmall(std::size_t n)
        : Error("minority class has " + std::to_string(n) + " instance(s); need at least 2") {}
};

class ClassTooSmall : public Error {
public:
    ClassTooSmall(const std::string& label, std::size_t n, int k)
        : Error("class '" + label + "' has " + std::to_string(n) + " instance(s); need at least " +
                std::to_string(k) + " for " + std::to_string(k) + "-fold splitting") {}
};

class SchemaMismatch : public Error {
public:
    explicit SchemaMismatch(const std::string& detail) : Error("schema mismatch: " + detail) {}
};

class BadLabel : public Error {
public:
    BadLabel(int line, const std::string& value)
        : Error("line " + std::to_string(line) + ": bad label '" + value + "'"), line_no(line) {}
    int line_no;
};

// ---- tree ----

class EmptyDataset : public Error {
public:
    EmptyDataset() : Error("empty dataset") {}
};

class ModelParseError : public Error {
public:
    ModelParseError(int line, const std::string& detail)
        : Error("model line " + std::to_string(line) + ": " + detail), line_no(line) {}
    int line_no;
};

// ---- synthetic workloads ----

class InvalidSpec : public Error {
public:
    explicit InvalidSpec(const std::string& detail) : Error("invalid spec: " + detail) {}
};

}  // namespace runent
