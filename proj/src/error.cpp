#include "gecforge/error.hpp"

namespace gecforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Sizing: return "sizing error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Consistency: return "internal consistency error";
    case ErrorKind::Load: return "load error";
    case ErrorKind::NotFound: return "not found";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::Auth: return "auth error";
    case ErrorKind::Template: return "template error";
    case ErrorKind::RateLimit: return "rate limit exhausted";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Transport: return "transport error";
    case ErrorKind::Usage: return "usage error";
  }
  return "error";
}

std::string_view error_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Config: return "config";
    case ErrorKind::Sizing: return "sizing";
    case ErrorKind::Io: return "io";
    case ErrorKind::Format: return "format";
    case ErrorKind::Alignment: return "alignment";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::Load: return "load";
    case ErrorKind::NotFound: return "not_found";
    case ErrorKind::Conflict: return "conflict";
    case ErrorKind::Auth: return "auth";
    case ErrorKind::Template: return "template";
    case ErrorKind::RateLimit: return "rate_limit";
    case ErrorKind::Timeout: return "timeout";
    case ErrorKind::Transport: return "transport";
    case ErrorKind::Usage: return "usage";
  }
  return "error";
}

}  // namespace gecforge
