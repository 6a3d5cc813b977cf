#pragma once

namespace meshtrap {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace meshtrap
