#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rlab {

/// Lowercase hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct ManifestFile {
  std::string path;  ///< relative to the manifest directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// manifest.json written next to the outputs of one run.
struct RunManifest {
  std::string command;
  std::string config_hash;  ///< SHA-256 of the canonical config text
  std::string code_version;
  std::string chart;        ///< e.g. "slab n=2 N0=17 Nt=17 L=1"
  std::string termination;  ///< horizon | blowup-flag | boundary-nonconvergence | ...
  double wall_time_s = 0.0;
  std::vector<ManifestFile> files;

  /// Checksums and sizes every path (relative to dir) and appends it.
  void add_file(const std::string& dir, const std::string& relative_path);
};

inline constexpr const char* kManifestName = "manifest.json";

void write_manifest(const std::string& dir, const RunManifest& m);
/// Throws DataError when the manifest is missing or malformed.
RunManifest read_manifest(const std::string& dir);

/// One message per missing, resized or modified file; empty when everything matches.
std::vector<std::string> verify_manifest(const std::string& dir);

}  // namespace rlab
