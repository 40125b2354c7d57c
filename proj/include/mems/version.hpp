#pragma once

namespace mems {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace mems
