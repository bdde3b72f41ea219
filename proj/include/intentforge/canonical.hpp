// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace intentforge {

/// Compact JSON with lexicographically sorted object keys.
///
/// nlohmann::json objects are std::map backed, so dump() already sorts;
/// this wrapper exists so every byte form that gets hashed goes through one
/// place.
std::string canonical_json(const nlohmann::json& j);

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

}  // namespace intentforge
