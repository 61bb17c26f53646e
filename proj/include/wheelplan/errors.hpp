#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wheelplan {

/// Base of every domain error raised by the library. `code()` is the stable,
/// machine-readable name printed by the CLI on stderr.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

class ContractViolation : public Error {
public:
    explicit ContractViolation(const std::string& what) : Error("ContractViolation", what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : Error("ParseError", what + " (at byte " + std::to_string(byte_offset) + ")"),
          offset_(byte_offset) {}

    std::size_t byte_offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error("IoError", what) {}
};

class InvalidScene : public Error {
public:
    explicit InvalidScene(const std::string& what) : Error("InvalidScene", what) {}
};

class NoFreeSpace : public Error {
public:
    explicit NoFreeSpace(const std::string& what) : Error("NoFreeSpace", what) {}
};

class NoPathFound : public Error {
public:
    explicit NoPathFound(const std::string& what) : Error("NoPathFound", what) {}
};

class InsufficientSamples : public Error {
public:
    explicit InsufficientSamples(const std::string& what) : Error("InsufficientSamples", what) {}
};

class FrameGap : public Error {
public:
    explicit FrameGap(const std::string& what) : Error("FrameGap", what) {}
};

}  // namespace wheelplan
