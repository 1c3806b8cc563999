#pragma once

namespace ffx {

inline constexpr const char* kVersion = "0.1.0";

} // namespace ffx
