#ifndef FLEXURAL_ERRORS_HPP
#define FLEXURAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace flexural
{

// Root of every error raised by the library. The CLI maps subclasses onto exit
// statuses: InputError -> 1, NumericalError -> 2.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, invalid parameters, unsupported options.
class InputError : public Error
{
public:
  using Error::Error;
};

// Arguments outside the domain of a mathematical function.
class DomainError : public InputError
{
public:
  using InputError::InputError;
};

class ParseError : public InputError
{
public:
  ParseError(const std::string &what, int line, const std::string &source = {})
    : InputError((source.empty() ? std::string() : source + ": ") + "line " +
                 std::to_string(line) + ": " + what),
      message_(what),
      line_(line)
  {
  }
  const std::string &message() const { return message_; }
  int line() const { return line_; }

private:
  std::string message_;
  int line_;
};

// Failures that depend on the numbers rather than the input structure.
class NumericalError : public Error
{
public:
  using Error::Error;
};

class OverflowError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

// Inverted or degenerate elements, broken mesh invariants.
class MeshError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

class SolverError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

class DimensionError : public Error
{
public:
  using Error::Error;
};

}  // namespace flexural

#endif  // FLEXURAL_ERRORS_HPP
