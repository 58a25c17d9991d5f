#include "ricci_lab/manifest.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "ricci_lab/errors.hpp"

namespace rlab {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1)
      throw Error("SHA-256 initialisation failed");
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_, data, n) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, md.data(), &len) != 1) throw Error("SHA-256 final failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i)
      os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

void RunManifest::add_file(const std::string& dir, const std::string& relative_path) {
  const fs::path full = fs::path(dir) / relative_path;
  files.push_back({relative_path, sha256_file(full.string()), fs::file_size(full)});
}

void write_manifest(const std::string& dir, const RunManifest& m) {
  json files = json::array();
  for (const ManifestFile& f : m.files)
    files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  const json doc = {{"command", m.command},         {"config_hash", m.config_hash},
                    {"code_version", m.code_version}, {"chart", m.chart},
                    {"termination", m.termination}, {"wall_time_s", m.wall_time_s},
                    {"files", files}};
  std::ofstream out(fs::path(dir) / kManifestName);
  if (!out) throw DataError("cannot write manifest in " + dir);
  out << doc.dump(2) << "\n";
}

RunManifest read_manifest(const std::string& dir) {
  const fs::path path = fs::path(dir) / kManifestName;
  std::ifstream in(path);
  if (!in) throw DataError("no manifest at " + path.string());
  try {
    const json doc = json::parse(in);
    RunManifest m;
    m.command = doc.at("command").get<std::string>();
    m.config_hash = doc.at("config_hash").get<std::string>();
    m.code_version = doc.at("code_version").get<std::string>();
    m.chart = doc.at("chart").get<std::string>();
    m.termination = doc.at("termination").get<std::string>();
    m.wall_time_s = doc.at("wall_time_s").get<double>();
    for (const json& f : doc.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uintmax_t>()});
    return m;
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> verify_manifest(const std::string& dir) {
  const RunManifest m = read_manifest(dir);
  std::vector<std::string> problems;
  for (const ManifestFile& f : m.files) {
    const fs::path full = fs::path(dir) / f.path;
    std::error_code ec;
    if (!fs::is_regular_file(full, ec)) {
      problems.push_back("missing: " + f.path);
      continue;
    }
    if (fs::file_size(full) != f.bytes) {
      problems.push_back("size changed: " + f.path);
      continue;
    }
    if (sha256_file(full.string()) != f.sha256) problems.push_back("checksum mismatch: " + f.path);
  }
  return problems;
}

}  // namespace rlab
