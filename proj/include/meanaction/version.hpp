#pragma once

namespace meanaction {
inline constexpr const char* kVersion = "0.3.0";
}
