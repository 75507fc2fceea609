#pragma once

namespace frtm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace frtm
