#pragma once

namespace boselearn {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace boselearn
