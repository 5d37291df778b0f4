#include "khl/limits.hpp"

#include <cstdlib>
#include <string>

namespace khl {

std::uint64_t work_cap() {
  static const std::uint64_t cap = [] {
    if (const char* env = std::getenv("KHL_WORK_CAP")) {
      try {
        const unsigned long long v = std::stoull(env);
        if (v > 0) return static_cast<std::uint64_t>(v);
      } catch (const std::exception&) {
      }
    }
    return kDefaultWorkCap;
  }();
  return cap;
}

}  // namespace khl
