#pragma once

namespace modesteer {
inline constexpr const char* kVersion = "0.1.0";
}
