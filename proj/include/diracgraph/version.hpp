#pragma once

namespace dg {
inline constexpr const char* version = "0.1.0";
}
