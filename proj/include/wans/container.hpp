#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "wans/stream_codec.hpp"
#include "wans/tensor.hpp"

namespace wans {

// Archive layout, all integers little-endian:
//
//   "ANSW" | u16 version | u16 layer count | layer*
//
//   layer: u16 name length | name bytes (UTF-8)
//          u8 rank | u32 dim * rank
//          u8 flags            bit 0: compressed, bits 1-7: split axis
//          u16 bins | f64 scale  (bins = 256 marks an uncompressed 8-bit layer)
//          u16 table size l     (0 when uncompressed)
//          u16 freq * bins      (absent when uncompressed)
//          u32 stream count
//          (u16 final state | u32 bit length | u32 symbol count) * streams
//          payload * streams, each ceil(bit length / 8) bytes
inline constexpr char kArchiveMagic[4] = {'A', 'N', 'S', 'W'};
inline constexpr std::uint16_t kArchiveVersion = 1;
inline constexpr std::size_t kArchiveHeaderBytes = 8;
inline constexpr std::uint16_t kRawBinsSentinel = 256;

std::vector<std::uint8_t> write_model(std::span<const LayerBundle> bundles);
void write_model(std::span<const LayerBundle> bundles, std::ostream& out);

// Rebuilds every bundle and checks its invariants. Distinct error codes for
// bad magic, unsupported version, truncation, invalid tables, malformed
// layers and trailing bytes.
std::vector<LayerBundle> read_model(std::span<const std::uint8_t> bytes);

struct LayerExtent {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

// Walks the archive using declared lengths only, without materialising any
// layer.
std::vector<LayerExtent> index_model(std::span<const std::uint8_t> bytes);

// Parses the single layer starting at extent.offset.
LayerBundle read_layer(std::span<const std::uint8_t> bytes, const LayerExtent& extent);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// JSON manifest describing raw float32 little-endian row-major tensors:
//
//   {"layers": [{"name": "conv1", "shape": [64, 3, 7, 7],
//                "file": "conv1.bin", "dtype": "float32",
//                "compress": false}]}
//
// `file` is relative to the manifest's directory; `compress` defaults to true.
struct ManifestEntry {
  std::string name;
  Shape shape;
  std::filesystem::path file;
  std::string dtype = "float32";
  bool compress = true;
};

struct TensorManifest {
  std::filesystem::path base_dir;
  std::vector<ManifestEntry> layers;
};

TensorManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
TensorManifest load_manifest(const std::filesystem::path& path);

std::vector<Tensor> load_tensors(const TensorManifest& manifest);

// Writes <name>.bin per tensor plus a manifest; returns the manifest path.
std::filesystem::path write_tensors(const std::filesystem::path& dir, std::span<const Tensor> tensors,
                                    const std::vector<bool>& compress_flags = {},
                                    const std::string& manifest_name = "manifest.json");

}  // namespace wans
