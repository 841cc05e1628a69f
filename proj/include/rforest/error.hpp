#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace rforest {

enum class ErrorCode {
  BadInput,           // malformed data, bad references, precondition violations
  NotTreeEmbeddable,  // metric fails the four-point condition
  InfiniteDistance,   // finite distance required
  Unreachable,        // projection target not reachable from the point
  Resource,           // configured search-size limit exceeded
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

// Thrown by hull construction; carries the quadruple that breaks 4PC.
class NotTreeEmbeddableError : public Error {
public:
  NotTreeEmbeddableError(std::array<size_t, 4> witness, std::string msg)
      : Error(ErrorCode::NotTreeEmbeddable, std::move(msg)), witness_(witness) {}
  const std::array<size_t, 4>& witness() const { return witness_; }

private:
  std::array<size_t, 4> witness_;
};

}  // namespace rforest
