#pragma once

namespace qwalk {
inline constexpr const char* kVersion = "0.1.0";
}
