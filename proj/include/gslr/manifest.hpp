#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "gslr/graph.hpp"
#include "gslr/io.hpp"
#include "gslr/random.hpp"
#include "gslr/version.hpp"

namespace gslr {

// Record of one CLI run: enough to rerun it bit-identically.
struct RunManifest {
  std::string command;                           // subcommand name
  std::vector<std::string> argv;                 // full argument vector
  Json config;                                   // resolved flag values
  std::map<std::string, std::string> input_digests;  // path -> content digest
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::string rng = std::string(kRngName);
  double duration_seconds = 0.0;
};

inline std::string digest_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xF];
    h >>= 4;
  }
  return s;
}

inline std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path + " for digest");
  std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return digest_hex(fnv1a64(contents));
}

inline Json manifest_to_json(const RunManifest& m) {
  Json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["config"] = m.config;
  j["input_digests"] = m.input_digests;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["rng"] = m.rng;
  j["duration_seconds"] = m.duration_seconds;
  return j;
}

inline RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.config = j.value("config", Json::object());
  if (j.contains("input_digests"))
    m.input_digests = j.at("input_digests").get<std::map<std::string, std::string>>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.version = j.value("version", std::string());
  m.rng = j.value("rng", std::string());
  m.duration_seconds = j.value("duration_seconds", 0.0);
  return m;
}

inline void write_manifest(const std::filesystem::path& out_dir, const RunManifest& m) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out) throw InvalidInput("cannot write manifest in " + out_dir.string());
  out << manifest_to_json(m).dump(2) << '\n';
}

inline RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open manifest " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InvalidInput("manifest " + path + " is not valid JSON: " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace gslr
