#pragma once

#include <cstdint>

namespace khl {

inline constexpr std::uint64_t kDefaultWorkCap = std::uint64_t{1} << 31;

// Work cap shared by the counting loops and lattice enumeration. The
// environment variable KHL_WORK_CAP overrides the default when it parses as a
// positive integer; it is read once per process.
std::uint64_t work_cap();

}  // namespace khl
