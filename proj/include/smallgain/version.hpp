#pragma once

namespace smallgain {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace smallgain
