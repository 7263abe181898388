#pragma once

namespace fastmusic {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fastmusic
