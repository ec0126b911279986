#pragma once

namespace trendtest {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace trendtest
