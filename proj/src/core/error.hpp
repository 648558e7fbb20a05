#pragma once

#include <stdexcept>
#include <string>

namespace mosto {

// Malformed or invalid user input (files, flags, updates).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computed result violated one of its own invariants.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The discrete-event simulation hit its event or time cap.
class SimulationDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mosto
