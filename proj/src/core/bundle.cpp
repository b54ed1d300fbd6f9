// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#include "neurobolt/bundle.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "neurobolt/error.hpp"

namespace neurobolt::bundle {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

template <typename T>
T get(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) throw DataError(where.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(where.string() + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

void write_f32_le(const fs::path& path, std::span<const float> values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(float)));
  } else {
    for (float v : values) {
      auto bits = std::bit_cast<std::uint32_t>(v);
      unsigned char b[4] = {static_cast<unsigned char>(bits), static_cast<unsigned char>(bits >> 8),
                            static_cast<unsigned char>(bits >> 16),
                            static_cast<unsigned char>(bits >> 24)};
      out.write(reinterpret_cast<const char*>(b), 4);
    }
  }
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<float> read_f32_le(const fs::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw DataError("cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % 4 != 0) throw DataError(path.string() + ": size is not a multiple of 4 bytes");
  in.seekg(0);
  std::vector<float> out(bytes / 4);
  std::vector<unsigned char> raw(bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(bytes));
  if (!in) throw DataError("read failed: " + path.string());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const unsigned char* b = raw.data() + 4 * i;
    const std::uint32_t bits = std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
                               (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
    out[i] = std::bit_cast<float>(bits);
  }
  return out;
}

void write_scan(const fs::path& dir, const ScanPair& scan) {
  scan.validate();
  fs::create_directories(dir);
  json meta = {{"subject_id", scan.subject_id},
               {"scan_id", scan.scan_id},
               {"condition", scan.condition},
               {"fs", scan.eeg.fs},
               {"tr", scan.roi.tr},
               {"channel_labels", scan.eeg.channel_labels},
               {"roi_labels", scan.roi.roi_labels},
               {"n_samples", scan.eeg.samples()},
               {"n_frames", scan.roi.frames()},
               {"eeg_normalized", scan.eeg.normalized},
               {"dtype", "float32"},
               {"endianness", "little"}};
  write_text(dir / "meta.json", meta.dump(2) + "\n");
  write_f32_le(dir / "eeg.bin", scan.eeg.data.flat());
  std::vector<float> roi(scan.roi.data.size());
  std::transform(scan.roi.data.flat().begin(), scan.roi.data.flat().end(), roi.begin(),
                 [](double v) { return static_cast<float>(v); });
  write_f32_le(dir / "roi.bin", roi);
}

ScanPair read_scan(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  const json meta = read_json(meta_path);
  if (get<std::string>(meta, "dtype", meta_path) != "float32") {
    throw DataError(meta_path.string() + ": unsupported dtype (expected float32)");
  }
  if (get<std::string>(meta, "endianness", meta_path) != "little") {
    throw DataError(meta_path.string() + ": unsupported endianness (expected little)");
  }
  ScanPair scan;
  scan.subject_id = get<std::string>(meta, "subject_id", meta_path);
  scan.scan_id = get<std::string>(meta, "scan_id", meta_path);
  scan.condition = get<std::string>(meta, "condition", meta_path);
  scan.eeg.fs = get<double>(meta, "fs", meta_path);
  scan.roi.tr = get<double>(meta, "tr", meta_path);
  scan.eeg.channel_labels = get<std::vector<std::string>>(meta, "channel_labels", meta_path);
  scan.roi.roi_labels = get<std::vector<std::string>>(meta, "roi_labels", meta_path);
  scan.eeg.normalized = meta.value("eeg_normalized", false);
  const auto n_samples = get<std::size_t>(meta, "n_samples", meta_path);
  const auto n_frames = get<std::size_t>(meta, "n_frames", meta_path);

  auto eeg = read_f32_le(dir / "eeg.bin");
  const std::size_t c = scan.eeg.channel_labels.size();
  if (eeg.size() != c * n_samples) {
    throw DataError((dir / "eeg.bin").string() + ": holds " + std::to_string(eeg.size()) +
                    " values, manifest declares " + std::to_string(c) + "x" +
                    std::to_string(n_samples));
  }
  scan.eeg.data = Matrix<float>(c, n_samples, std::move(eeg));

  const auto roi = read_f32_le(dir / "roi.bin");
  const std::size_t p = scan.roi.roi_labels.size();
  if (roi.size() != p * n_frames) {
    throw DataError((dir / "roi.bin").string() + ": holds " + std::to_string(roi.size()) +
                    " values, manifest declares " + std::to_string(p) + "x" +
                    std::to_string(n_frames));
  }
  scan.roi.data = Matrix<double>(p, n_frames, std::vector<double>(roi.begin(), roi.end()));
  try {
    scan.validate();
  } catch (const InvalidArgument& e) {
    throw DataError(dir.string() + ": " + e.what());
  }
  return scan;
}

void write_dataset(const fs::path& root, const std::vector<ScanPair>& scans) {
  fs::create_directories(root);
  json entries = json::array();
  for (const auto& s : scans) {
    write_scan(root / s.scan_id, s);
    entries.push_back({{"dir", s.scan_id},
                       {"subject_id", s.subject_id},
                       {"scan_id", s.scan_id},
                       {"condition", s.condition}});
  }
  write_text(root / "dataset.json", json{{"scans", entries}}.dump(2) + "\n");
}

std::vector<ScanPtr> read_dataset(const fs::path& root) {
  const fs::path manifest = root / "dataset.json";
  const json j = read_json(manifest);
  if (!j.contains("scans") || !j["scans"].is_array()) {
    throw DataError(manifest.string() + ": missing 'scans' array");
  }
  std::vector<ScanPtr> out;
  for (const auto& e : j["scans"]) {
    const auto dir = get<std::string>(e, "dir", manifest);
    auto scan = read_scan(root / dir);
    if (e.contains("scan_id") && e["scan_id"].get<std::string>() != scan.scan_id) {
      throw DataError(manifest.string() + ": entry '" + dir + "' scan_id does not match its bundle");
    }
    out.push_back(std::make_shared<const ScanPair>(std::move(scan)));
  }
  return out;
}

}  // namespace neurobolt::bundle
