#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gecforge {

enum class ErrorKind {
  Input,
  Config,
  Sizing,
  Io,
  Format,
  Alignment,
  Validation,
  Consistency,
  Load,
  NotFound,
  Conflict,
  Auth,
  Template,
  RateLimit,
  Timeout,
  Transport,
  Usage,
};

std::string_view to_string(ErrorKind kind);

/// Stable snake_case identifier for machine-readable error bodies.
std::string_view error_code(ErrorKind kind);

/// Base of every error thrown by the library. The kind is what callers
/// (and the CLI exit path) switch on; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define GECFORGE_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& message) : Error(Kind, message) {}    \
  };

GECFORGE_DEFINE_ERROR(InputError, ErrorKind::Input)
GECFORGE_DEFINE_ERROR(ConfigError, ErrorKind::Config)
GECFORGE_DEFINE_ERROR(SizingError, ErrorKind::Sizing)
GECFORGE_DEFINE_ERROR(FormatError, ErrorKind::Format)
GECFORGE_DEFINE_ERROR(AlignmentError, ErrorKind::Alignment)
GECFORGE_DEFINE_ERROR(ValidationError, ErrorKind::Validation)
GECFORGE_DEFINE_ERROR(ConsistencyError, ErrorKind::Consistency)
GECFORGE_DEFINE_ERROR(LoadError, ErrorKind::Load)
GECFORGE_DEFINE_ERROR(NotFoundError, ErrorKind::NotFound)
GECFORGE_DEFINE_ERROR(ConflictError, ErrorKind::Conflict)
GECFORGE_DEFINE_ERROR(AuthError, ErrorKind::Auth)
GECFORGE_DEFINE_ERROR(TemplateError, ErrorKind::Template)
GECFORGE_DEFINE_ERROR(RateLimitError, ErrorKind::RateLimit)
GECFORGE_DEFINE_ERROR(TimeoutError, ErrorKind::Timeout)
GECFORGE_DEFINE_ERROR(TransportError, ErrorKind::Transport)
GECFORGE_DEFINE_ERROR(UsageError, ErrorKind::Usage)

#undef GECFORGE_DEFINE_ERROR

/// I/O failures always carry the offending path.
class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(ErrorKind::Io, path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace gecforge
