#include "kagome/errors.hpp"

namespace kagome {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::capacity: return "capacity";
    case ErrorKind::config: return "config";
    case ErrorKind::argument: return "argument";
    case ErrorKind::state: return "state";
    case ErrorKind::contraction: return "contraction";
    case ErrorKind::singular_environment: return "singular_environment";
    case ErrorKind::sector: return "sector";
    case ErrorKind::parse: return "parse";
    case ErrorKind::validation: return "validation";
    case ErrorKind::numerical: return "numerical";
  }
  return "unknown";
}

}  // namespace kagome
