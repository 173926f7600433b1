#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "fpqkd/detection.hpp"
#include "fpqkd/phase_source.hpp"
#include "fpqkd/postselect.hpp"

namespace fpqkd {

/// Configuration problems (bad file, unknown key, invariant violation).
/// The CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Data problems (malformed trace records, inconsistent tallies).
/// The CLI maps these to exit code 3.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DecoyConfig {
  int n_cut = 10;
  double k_sigma = 0.0;
};

struct KeyRateConfig {
  double f_e = 1.16;
};

struct RunSection {
  std::uint64_t n_samples = 10'000'000;
  int shards = 8;
  std::string out_dir = "out";
};

struct RunConfig {
  SourceConfig source;
  double reshape_c = -1.0;  // < 0 means "auto": derive via compute_C
  RegionParams regions;
  ChannelParams channel;
  DecoyConfig decoy;
  KeyRateConfig keyrate;
  RunSection run;

  /// Resolved reshape spec ("auto" triggers compute_C).
  ReshapeSpec reshape() const;
};

/// Parse the sectioned key=value config format. Unknown sections or keys are
/// rejected; errors carry the line number. Missing keys keep documented
/// defaults. Re-validates all module invariants.
RunConfig load_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical serialization; dump(load(x)) is idempotent.
std::string dump_config(const RunConfig& cfg);

/// FNV-1a hash of the canonical dump; stamped into every artifact file.
std::uint64_t config_hash(const RunConfig& cfg);

void validate(const RunConfig& cfg);

}  // namespace fpqkd
