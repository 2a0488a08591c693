#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "stargraph/graph.hpp"

namespace stargraph {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian layout: "GNLS", version u32, n_edges u32, n_points u64,
/// dx f64, then each edge as interleaved (re, im) f64 pairs.
inline constexpr std::size_t kCheckpointHeaderBytes = 4 + 4 + 4 + 8 + 8;

void checkpoint_save(const GraphField& field, const std::filesystem::path& path);

/// Throws checkpoint_corrupt_header (bad magic, short or nonsensical header),
/// checkpoint_version_mismatch, or checkpoint_shape_mismatch (edge count,
/// payload length, or a grid that differs from `expected`).
GraphField checkpoint_load(const std::filesystem::path& path, const std::optional<GridSpec>& expected = std::nullopt);

}  // namespace stargraph
