#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "latinv/coupling.hpp"
#include "latinv/process.hpp"
#include "latinv/stats.hpp"

namespace latinv {

using nlohmann::json;

// --- serialization ---------------------------------------------------------
// Canonical output uses exact 64-bit fraction strings ("frac64") so specs
// round-trip losslessly; input additionally accepts plain decimals.

json window_to_json(const WindowFn& w);
WindowFn window_from_json(const json& j);

json affine_to_json(const AffineMap& g);
AffineMap affine_from_json(const json& j);

json polymap_to_json(const PolyMap& p);
PolyMap polymap_from_json(const json& j);

json spec_to_json(const ProcessSpec& spec);
ProcessSpec spec_from_json(const json& j);

json box_to_json(const Box& b);
Box box_from_json(const json& j);

// Named presets: "s1", "s2", "s3" (planar degree-1/2/3 processes with
// window [0, 0.5)), "poly:<d>,<k>,<delta>", "bernoulli:<p>",
// "periodic:<n>", "cutproject-s1".
ProcessSpec spec_from_preset(const std::string& name, uint64_t seed);

// Config files: JSON ("{...}") or a TOML subset (tables, key = value,
// scalars, nested arrays). Returns the parsed tree as JSON.
json parse_config_text(const std::string& text);
json load_config_file(const std::string& path);

// --- hashing / provenance ----------------------------------------------------

uint64_t fnv1a64(const void* data, size_t n);
uint64_t config_hash(const json& j);
std::string hex64(uint64_t v);

// Provenance line embedded in every artifact.
std::string meta_comment(uint64_t seed, uint64_t cfg_hash);

// --- artifact emission -------------------------------------------------------

// PBM P4 bytes for a 2-D point set (set points are black). The meta
// comment rides in the header, so equal (seed, config, version) triples
// reproduce bytes exactly.
std::string pbm_bytes(const PointSet& s, const std::string& meta);

// Axis-aligned 2-D slice of a higher-dimensional set (fixes axis = value).
PointSet slice2d(const PointSet& s, int axis, int64_t value);

// Horizontal composite of equally-shaped panels with a 2-pixel gutter.
std::string panel_pbm_bytes(const std::vector<PointSet>& panels, const std::string& meta);

std::string csv_points_bytes(const PointSet& s, const std::string& meta);

// Raw bit grid: 16-byte header (magic "LATINVG1", u32 dim, u32 zero),
// then dim * (i64 lo, i64 hi), u64 seed, u64 config hash, then the packed
// words, all little-endian.
std::string raw_grid_bytes(const PointSet& s, uint64_t seed, uint64_t cfg_hash);

void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

// --- report scaffolding ------------------------------------------------------

json report_skeleton(const std::string& command, uint64_t seed, const json& config);

} // namespace latinv
