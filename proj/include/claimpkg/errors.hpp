#pragma once

#include <stdexcept>
#include <string>
#include <vector>
#include <cstdint>

namespace claimpkg {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BuildError : std::runtime_error {
  explicit BuildError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TransportError : std::runtime_error {
  explicit TransportError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ProtocolError : std::runtime_error {
  explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

struct VerdictDomainError : std::runtime_error {
  explicit VerdictDomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// Decoding hit a state where no token is permitted.
struct DeadEndError : std::runtime_error {
  explicit DeadEndError(const std::string& msg) : std::runtime_error(msg) {}
};

// Decoding ran out of budget with an unclosed entity span; carries the
// partial output so callers can inspect it.
struct TruncationError : std::runtime_error {
  TruncationError(const std::string& msg, std::vector<int32_t> partial)
      : std::runtime_error(msg), partial_output(std::move(partial)) {}
  std::vector<int32_t> partial_output;
};

}  // namespace claimpkg
