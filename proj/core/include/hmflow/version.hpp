#pragma once

namespace hmflow {

inline constexpr const char* kVersion = "hmflow 1.0.0";

}  // namespace hmflow
