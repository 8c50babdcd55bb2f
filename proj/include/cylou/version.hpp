#pragma once

namespace cylou {
inline constexpr const char* kVersion = "0.1.0";
}
