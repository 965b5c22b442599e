// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fadechan/pdt/pdt.hpp"

namespace fadechan {

using Json = nlohmann::json;

// Number with 12 significant digits; integral values print without a
// fraction, non-finite values as null.
std::string format_number(double value);

// Sorted keys, two-space indentation, 12 significant digits, LF endings.
std::string canonical_json(const Json& value);

// One row per bin: eta_bin_left,eta_bin_right,density.
std::string distribution_csv(const TransmittanceDistribution& dist);

// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// 64-bit FNV-1a digest as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace fadechan
