#pragma once

namespace khl {

inline constexpr const char* kVersion = "1.0.0";
// Bumped whenever a CSV column or JSON key changes meaning.
inline constexpr int kSchemaVersion = 1;

}  // namespace khl
