#pragma once

namespace jeo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace jeo
