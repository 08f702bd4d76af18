#include "wans/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wans/error.hpp"

namespace wans {
namespace {

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes, std::size_t pos = 0) : bytes_(bytes), pos_(pos) {}

  std::uint8_t u8(const char* what) { return static_cast<std::uint8_t>(le(1, what)); }
  std::uint16_t u16(const char* what) { return static_cast<std::uint16_t>(le(2, what)); }
  std::uint32_t u32(const char* what) { return static_cast<std::uint32_t>(le(4, what)); }
  double f64(const char* what) { return std::bit_cast<double>(le(8, what)); }

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  void skip(std::size_t n, const char* what) { take(n, what); }

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) const {
    if (n > bytes_.size() - pos_) {
      throw Error(ErrorCode::kTruncated, std::string("archive ends inside ") + what + " at offset " +
                                             std::to_string(pos_) + " (need " + std::to_string(n) +
                                             " bytes, " + std::to_string(bytes_.size() - pos_) + " left)");
    }
  }
  std::uint64_t le(int n, const char* what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
};

void write_layer(ByteWriter& w, const LayerBundle& b) {
  b.validate();
  if (b.name.size() > UINT16_MAX) throw Error(ErrorCode::kInvalidArgument, "layer name longer than 65535 bytes");
  w.u16(static_cast<std::uint16_t>(b.name.size()));
  w.bytes({reinterpret_cast<const std::uint8_t*>(b.name.data()), b.name.size()});
  w.u8(static_cast<std::uint8_t>(b.shape.size()));
  for (auto d : b.shape) w.u32(d);
  w.u8(static_cast<std::uint8_t>((b.compressed ? 1u : 0u) | (b.split_axis << 1)));
  w.u16(static_cast<std::uint16_t>(b.compressed ? b.quantizer.bins : kRawBinsSentinel));
  w.f64(b.quantizer.scale);
  if (b.compressed) {
    w.u16(static_cast<std::uint16_t>(b.histogram->table_size()));
    for (auto f : b.histogram->freqs()) w.u16(static_cast<std::uint16_t>(f));
  } else {
    w.u16(0);
  }
  w.u32(static_cast<std::uint32_t>(b.streams.size()));
  for (const auto& s : b.streams) {
    w.u16(static_cast<std::uint16_t>(s.final_state));
    w.u32(s.bit_length);
    w.u32(s.symbol_count);
  }
  for (const auto& s : b.streams) w.bytes(s.payload);
}

struct StreamHeader {
  std::uint32_t final_state;
  std::uint32_t bit_length;
  std::uint32_t symbol_count;
};

LayerBundle parse_layer(ByteReader& r) {
  LayerBundle b;
  const auto name_len = r.u16("layer name length");
  const auto name = r.take(name_len, "layer name");
  b.name.assign(reinterpret_cast<const char*>(name.data()), name.size());

  const auto rank = r.u8("rank");
  if (rank == 0) throw Error(ErrorCode::kMalformedLayer, "layer '" + b.name + "' has rank 0");
  b.shape.resize(rank);
  for (auto& d : b.shape) d = r.u32("shape");

  const auto flags = r.u8("flags");
  b.compressed = (flags & 1u) != 0;
  b.split_axis = flags >> 1;
  if (b.split_axis >= rank) {
    throw Error(ErrorCode::kMalformedLayer, "layer '" + b.name + "': split axis " + std::to_string(b.split_axis) +
                                                " >= rank " + std::to_string(rank));
  }

  const auto bins = r.u16("bins");
  b.quantizer.scale = r.f64("scale");
  b.quantizer.layer_id = b.name;
  const auto table_size = r.u16("table size");
  if (b.compressed) {
    if (bins < 3 || bins % 2 == 0 || bins > 255) {
      throw Error(ErrorCode::kMalformedLayer, "layer '" + b.name + "': invalid bin count " + std::to_string(bins));
    }
    b.quantizer.bins = bins;
    std::vector<std::uint32_t> freqs(bins);
    for (auto& f : freqs) f = r.u16("normalized frequencies");
    if (!is_valid_table_size(table_size)) {
      throw Error(ErrorCode::kInvalidTable, "layer '" + b.name + "': table size " + std::to_string(table_size));
    }
    try {
      b.histogram.emplace(table_size, std::move(freqs));
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidTable, "layer '" + b.name + "': " + e.what());
    }
  } else {
    if (bins != kRawBinsSentinel || table_size != 0) {
      throw Error(ErrorCode::kMalformedLayer, "layer '" + b.name + "': uncompressed layer with a table");
    }
    b.quantizer.bins = kRawLayerBins;
  }

  const auto stream_count = r.u32("stream count");
  // Every header takes 10 bytes; reject counts the remaining input cannot hold
  // before allocating for them.
  if (stream_count > r.remaining() / kStreamHeaderBytes) {
    throw Error(ErrorCode::kTruncated, "layer '" + b.name + "' declares " + std::to_string(stream_count) +
                                           " streams but the archive ends first");
  }
  std::vector<StreamHeader> headers(stream_count);
  for (auto& h : headers) {
    h.final_state = r.u16("stream header");
    h.bit_length = r.u32("stream header");
    h.symbol_count = r.u32("stream header");
  }
  b.streams.resize(stream_count);
  for (std::size_t i = 0; i < stream_count; ++i) {
    auto& s = b.streams[i];
    s.final_state = headers[i].final_state;
    s.bit_length = headers[i].bit_length;
    s.symbol_count = headers[i].symbol_count;
    const auto payload = r.take(payload_bytes_for(s.bit_length), "stream payload");
    s.payload.assign(payload.begin(), payload.end());
  }

  try {
    b.validate();
  } catch (const Error& e) {
    if (e.is_corrupt_data()) throw;
    throw Error(ErrorCode::kMalformedLayer, e.what());
  }
  return b;
}

std::uint16_t read_header(ByteReader& r) {
  const auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kArchiveMagic, 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not an ANSW archive");
  }
  const auto version = r.u16("version");
  if (version != kArchiveVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "archive version " + std::to_string(version) + ", reader supports " +
                                                    std::to_string(kArchiveVersion));
  }
  return r.u16("layer count");
}

// Advances over one layer using declared sizes only.
void skip_layer(ByteReader& r) {
  r.skip(r.u16("layer name length"), "layer name");
  r.skip(4u * r.u8("rank"), "shape");
  const bool compressed = (r.u8("flags") & 1u) != 0;
  const auto bins = r.u16("bins");
  r.skip(8, "scale");
  r.skip(2, "table size");
  if (compressed) r.skip(2u * bins, "normalized frequencies");
  const auto stream_count = r.u32("stream count");
  if (stream_count > r.remaining() / kStreamHeaderBytes) {
    throw Error(ErrorCode::kTruncated, "stream headers run past the end of the archive");
  }
  std::uint64_t payload = 0;
  for (std::uint32_t i = 0; i < stream_count; ++i) {
    r.skip(2, "stream header");
    payload += payload_bytes_for(r.u32("stream header"));
    r.skip(4, "stream header");
  }
  if (payload > r.remaining()) throw Error(ErrorCode::kTruncated, "payloads run past the end of the archive");
  r.skip(static_cast<std::size_t>(payload), "stream payload");
}

std::string sanitize(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                    c == '_' || c == '-';
    out += ok ? c : '_';
  }
  return out.empty() ? std::string("layer") : out;
}

}  // namespace

std::vector<std::uint8_t> write_model(std::span<const LayerBundle> bundles) {
  if (bundles.size() > UINT16_MAX) throw Error(ErrorCode::kInvalidArgument, "more than 65535 layers");
  ByteWriter w;
  w.bytes({reinterpret_cast<const std::uint8_t*>(kArchiveMagic), 4});
  w.u16(kArchiveVersion);
  w.u16(static_cast<std::uint16_t>(bundles.size()));
  for (const auto& b : bundles) write_layer(w, b);
  return w.take();
}

void write_model(std::span<const LayerBundle> bundles, std::ostream& out) {
  const auto bytes = write_model(bundles);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing archive");
}

std::vector<LayerBundle> read_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto count = read_header(r);
  std::vector<LayerBundle> out;
  out.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) out.push_back(parse_layer(r));
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kTrailingData, std::to_string(r.remaining()) + " bytes after the last layer");
  }
  return out;
}

std::vector<LayerExtent> index_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto count = read_header(r);
  std::vector<LayerExtent> out;
  for (std::uint16_t i = 0; i < count; ++i) {
    LayerExtent e;
    e.offset = r.position();
    {
      ByteReader peek(bytes, e.offset);
      const auto len = peek.u16("layer name length");
      const auto name = peek.take(len, "layer name");
      e.name.assign(reinterpret_cast<const char*>(name.data()), name.size());
    }
    skip_layer(r);
    e.length = r.position() - e.offset;
    out.push_back(std::move(e));
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kTrailingData, std::to_string(r.remaining()) + " bytes after the last layer");
  }
  return out;
}

LayerBundle read_layer(std::span<const std::uint8_t> bytes, const LayerExtent& extent) {
  if (extent.offset > bytes.size() || extent.length > bytes.size() - extent.offset) {
    throw Error(ErrorCode::kTruncated, "layer extent outside the archive");
  }
  ByteReader r(bytes.subspan(extent.offset, extent.length));
  auto b = parse_layer(r);
  if (r.remaining() != 0) throw Error(ErrorCode::kTrailingData, "layer extent longer than the layer");
  return b;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot create '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

TensorManifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir) {
  using nlohmann::json;
  TensorManifest m;
  m.base_dir = base_dir;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array()) {
      throw Error(ErrorCode::kMalformedManifest, "expected an object with a \"layers\" array");
    }
    std::set<std::string> names;
    for (const auto& item : doc["layers"]) {
      ManifestEntry e;
      e.name = item.at("name").get<std::string>();
      e.file = item.at("file").get<std::string>();
      e.dtype = item.value("dtype", std::string("float32"));
      e.compress = item.value("compress", true);
      for (const auto& d : item.at("shape")) {
        const auto v = d.get<std::int64_t>();
        if (v <= 0 || v > UINT32_MAX) {
          throw Error(ErrorCode::kMalformedManifest, "layer '" + e.name + "': dimension " + std::to_string(v));
        }
        e.shape.push_back(static_cast<std::uint32_t>(v));
      }
      if (e.name.empty()) throw Error(ErrorCode::kMalformedManifest, "layer with an empty name");
      if (e.shape.empty()) throw Error(ErrorCode::kMalformedManifest, "layer '" + e.name + "' has no shape");
      if (e.dtype != "float32") {
        throw Error(ErrorCode::kMalformedManifest, "layer '" + e.name + "': unsupported dtype '" + e.dtype + "'");
      }
      if (!names.insert(e.name).second) throw Error(ErrorCode::kDuplicateName, "layer '" + e.name + "'");
      m.layers.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedManifest, e.what());
  }
  return m;
}

TensorManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

std::vector<Tensor> load_tensors(const TensorManifest& manifest) {
  std::vector<Tensor> out;
  for (const auto& e : manifest.layers) {
    const auto path = manifest.base_dir / e.file;
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw Error(ErrorCode::kIo, "layer '" + e.name + "': cannot stat '" + path.string() + "'");
    const std::uint64_t expected = 4 * element_count(e.shape);
    if (size != expected) {
      throw Error(ErrorCode::kLengthMismatch, "layer '" + e.name + "': file has " + std::to_string(size) +
                                                  " bytes, shape " + shape_to_string(e.shape) + " needs " +
                                                  std::to_string(expected));
    }
    const auto bytes = read_file(path);
    if (bytes.size() != expected) throw Error(ErrorCode::kLengthMismatch, "layer '" + e.name + "' changed on disk");
    Tensor t;
    t.name = e.name;
    t.shape = e.shape;
    t.values.resize(bytes.size() / 4);
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      const std::uint32_t bits = static_cast<std::uint32_t>(bytes[4 * i]) |
                                 static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8 |
                                 static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16 |
                                 static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24;
      t.values[i] = std::bit_cast<float>(bits);
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::filesystem::path write_tensors(const std::filesystem::path& dir, std::span<const Tensor> tensors,
                                    const std::vector<bool>& compress_flags, const std::string& manifest_name) {
  using nlohmann::ordered_json;
  std::filesystem::create_directories(dir);
  ordered_json layers = ordered_json::array();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& t = tensors[i];
    std::ostringstream file;
    file << std::setw(3) << std::setfill('0') << i << "_" << sanitize(t.name) << ".bin";
    std::vector<std::uint8_t> bytes(4 * t.values.size());
    for (std::size_t k = 0; k < t.values.size(); ++k) {
      const auto bits = std::bit_cast<std::uint32_t>(t.values[k]);
      for (int b = 0; b < 4; ++b) bytes[4 * k + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
    write_file(dir / file.str(), bytes);
    ordered_json entry;
    entry["name"] = t.name;
    entry["shape"] = t.shape;
    entry["file"] = file.str();
    entry["dtype"] = "float32";
    if (i < compress_flags.size()) entry["compress"] = compress_flags[i];
    layers.push_back(std::move(entry));
  }
  ordered_json doc;
  doc["layers"] = std::move(layers);
  const auto path = dir / manifest_name;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot create '" + path.string() + "'");
  out << doc.dump(2) << "\n";
  return path;
}

}  // namespace wans
