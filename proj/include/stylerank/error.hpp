#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stylerank {

/// Thrown when an operation's input lies outside its domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed Standard MIDI File. `offset()` is the byte position where
/// decoding failed.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

} // namespace stylerank
