#pragma once

#include <stdexcept>
#include <string>

namespace inexact {

// Malformed input: bad dimensions, values outside a domain, unreadable files.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative solver hit its iteration or attempt cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
[[noreturn]] inline void fail(const std::string& what) { throw InvalidInput(what); }
inline void require(bool condition, const std::string& what) {
  if (!condition) fail(what);
}
}  // namespace detail

}  // namespace inexact
