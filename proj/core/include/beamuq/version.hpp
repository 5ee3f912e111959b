#pragma once

namespace beamuq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace beamuq
