#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "jumpbsde/bsde_core.hpp"

namespace jumpbsde {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

/// %.17g, round-trip exact.
std::string format_double(double v);

/// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// `# config_fingerprint=<fp>` line followed by `body`.
std::string with_fingerprint(std::string_view fingerprint, std::string_view body);

/// Rows `time, state, u`, states by label.
std::string value_field_csv(const MarkovModel& model, const ValueField& u);

/// Parses the format above (leading `#` lines skipped). Throws std::runtime_error on
/// malformed rows, unknown states or a ragged grid.
ValueField read_value_field_csv(const std::filesystem::path& path, const MarkovModel& model);

/// Rows `path_id, jump_index, time, from_state, to_state`, one per jump.
std::string trajectories_csv(const MarkovModel& model, const std::vector<Trajectory>& paths);

}  // namespace jumpbsde
