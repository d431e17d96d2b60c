#include "ecoap/rng.hpp"

#include "ecoap/error.hpp"

namespace ecoap {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Consistency: return "consistency";
    case ErrorKind::Input: return "input";
    case ErrorKind::Infeasible: return "infeasible-density";
    case ErrorKind::Placement: return "placement";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Degenerate: return "degenerate-data";
  }
  return "unknown";
}

}  // namespace ecoap
