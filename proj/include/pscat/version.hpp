#pragma once

namespace pscat {

inline constexpr const char* version = "0.1.0";

} // namespace pscat
