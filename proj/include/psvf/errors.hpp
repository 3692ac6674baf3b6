#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psvf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed input that violates an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Malformed expression or system-file text.
///
/// `offset` is a byte offset into the parsed string. For system files `line`
/// and `column` (1-based) locate the error; both are 0 for bare expressions.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected, std::size_t line = 0,
              std::size_t column = 0);

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t offset_;
  std::string expected_;
  std::size_t line_;
  std::size_t column_;
};

class UnboundParameter : public Error {
 public:
  explicit UnboundParameter(std::string name);
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Evaluation left the real domain (sqrt of a negative, division by zero...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class MissingSection : public Error {
 public:
  explicit MissingSection(std::string section);
  const std::string& section() const noexcept { return section_; }

 private:
  std::string section_;
};

class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

class ComplexEigenvalues : public Error {
 public:
  explicit ComplexEigenvalues(double discriminant);
  double discriminant() const noexcept { return discriminant_; }

 private:
  double discriminant_;
};

/// The square root in the first-return formula has a negative radicand.
class ComplexBranch : public Error {
 public:
  explicit ComplexBranch(double radicand);
  double radicand() const noexcept { return radicand_; }

 private:
  double radicand_;
};

class LambdaZero : public Error {
 public:
  LambdaZero();
};

class NoReturn : public Error {
 public:
  using Error::Error;
};

class DegenerateContact : public Error {
 public:
  using Error::Error;
};

class CertificateFailed : public Error {
 public:
  using Error::Error;
};

class RegimeViolation : public Error {
 public:
  using Error::Error;
};

/// Class name of a library error ("SyntaxError", "LambdaZero", ...), or
/// "Error" for anything else.
std::string error_kind(const std::exception& e);

}  // namespace psvf
