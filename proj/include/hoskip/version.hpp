#pragma once

namespace hoskip {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace hoskip
