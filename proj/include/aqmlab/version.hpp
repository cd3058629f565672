#pragma once

namespace aqmlab {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace aqmlab
