#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace olaf {

// Malformed input: dimension mismatch, bad topology, schema violations.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StructuralError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class EncodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
public:
    DecodeError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace olaf
