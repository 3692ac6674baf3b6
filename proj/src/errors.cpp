#include "psvf/errors.hpp"

#include <cstdio>
#include <utility>

namespace psvf {

namespace {

std::string syntax_message(std::size_t offset, const std::string& expected,
                           std::size_t line, std::size_t column) {
  std::string msg = "syntax error";
  if (line > 0) {
    msg += " at line " + std::to_string(line) + ", column " +
           std::to_string(column);
  } else {
    msg += " at offset " + std::to_string(offset);
  }
  msg += ": expected " + expected;
  return msg;
}

std::string with_value(const char* what, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return std::string(what) + " (" + buf + ")";
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, std::string expected,
                         std::size_t line, std::size_t column)
    : Error(syntax_message(offset, expected, line, column)),
      offset_(offset),
      expected_(std::move(expected)),
      line_(line),
      column_(column) {}

UnboundParameter::UnboundParameter(std::string name)
    : Error("unbound parameter '" + name + "'"), name_(std::move(name)) {}

MissingSection::MissingSection(std::string section)
    : Error("missing section [" + section + "]"), section_(std::move(section)) {}

ComplexEigenvalues::ComplexEigenvalues(double discriminant)
    : Error(with_value("complex eigenvalues, discriminant", discriminant)),
      discriminant_(discriminant) {}

ComplexBranch::ComplexBranch(double radicand)
    : Error(with_value("first-return map off its real branch, radicand",
                       radicand)),
      radicand_(radicand) {}

LambdaZero::LambdaZero()
    : Error("return-map eigenvalues are singular at lambda = 0") {}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
  if (dynamic_cast<const SyntaxError*>(&e)) return "SyntaxError";
  if (dynamic_cast<const UnboundParameter*>(&e)) return "UnboundParameter";
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const MissingSection*>(&e)) return "MissingSection";
  if (dynamic_cast<const DegenerateDenominator*>(&e)) return "DegenerateDenominator";
  if (dynamic_cast<const ComplexEigenvalues*>(&e)) return "ComplexEigenvalues";
  if (dynamic_cast<const ComplexBranch*>(&e)) return "ComplexBranch";
  if (dynamic_cast<const LambdaZero*>(&e)) return "LambdaZero";
  if (dynamic_cast<const NoReturn*>(&e)) return "NoReturn";
  if (dynamic_cast<const DegenerateContact*>(&e)) return "DegenerateContact";
  if (dynamic_cast<const CertificateFailed*>(&e)) return "CertificateFailed";
  if (dynamic_cast<const RegimeViolation*>(&e)) return "RegimeViolation";
  return "Error";
}

}  // namespace psvf
