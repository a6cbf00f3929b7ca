#pragma once

#include <span>
#include <string_view>

namespace forensight {

/// True for an upper-case ISO 3166-1 alpha-2 code.
bool is_known_region(std::string_view code);
std::span<const std::string_view> known_regions();

}  // namespace forensight
