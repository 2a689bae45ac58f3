#pragma once

#include <stdexcept>
#include <string>

namespace gamedyn {

enum class ErrKind {
  invalid_argument,
  parse,
  domain,
  shape,
  config,
  convergence,
  resolution,
  io,
  internal,
};

/// Library-wide exception. `kind()` maps onto the C API status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrKind kind() const noexcept { return kind_; }

  static Error invalid(std::string m) { return {ErrKind::invalid_argument, std::move(m)}; }
  static Error parse(std::string m) { return {ErrKind::parse, std::move(m)}; }
  static Error domain(std::string m) { return {ErrKind::domain, std::move(m)}; }
  static Error shape(std::string m) { return {ErrKind::shape, std::move(m)}; }
  static Error config(std::string m) { return {ErrKind::config, std::move(m)}; }
  static Error convergence(std::string m) { return {ErrKind::convergence, std::move(m)}; }
  static Error resolution(std::string m) { return {ErrKind::resolution, std::move(m)}; }
  static Error io(std::string m) { return {ErrKind::io, std::move(m)}; }

 private:
  ErrKind kind_;
};

}  // namespace gamedyn
