#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fpqkd/config.hpp"
#include "fpqkd/decoy.hpp"
#include "fpqkd/detection.hpp"
#include "fpqkd/keyrate.hpp"

namespace fpqkd {

/// CSV serialization. All floating-point fields use 17 significant digits so
/// 64-bit values round-trip exactly; every file starts with a config-hash
/// comment line.

std::string format_g17(double v);

std::string tallies_csv(std::uint64_t cfg_hash, std::span<const RegionTally> tallies);
std::vector<RegionTally> parse_tallies_csv(const std::string& text);

std::string bounds_csv(std::uint64_t cfg_hash, const DecoyBounds& bounds);
std::string keyrate_csv(std::uint64_t cfg_hash, double loss_db, const KeyRateReport& report);
std::string sweep_csv(std::uint64_t cfg_hash, std::span<const SweepRow> rows);

struct RunManifest {
  std::uint64_t cfg_hash;
  std::uint64_t seed;
  std::uint64_t n_samples;
  int shards;
  std::string version;
  std::vector<std::string> artifacts;
};

std::string manifest_text(const RunManifest& m, const RunConfig& cfg);

/// Write a file, creating parent directories; throws DataError with the path
/// on failure.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

inline constexpr const char* kVersion = "fpqkd 0.1.0";

}  // namespace fpqkd
