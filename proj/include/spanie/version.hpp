#pragma once

namespace spanie {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spanie
