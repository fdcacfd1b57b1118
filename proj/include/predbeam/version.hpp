#pragma once

namespace predbeam {

inline constexpr const char* kVersion = "1.0.0";

} // namespace predbeam
