#include "wans/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "wans/allocation.hpp"
#include "wans/container.hpp"
#include "wans/distributions.hpp"
#include "wans/error.hpp"
#include "wans/quantizer.hpp"
#include "wans/stream_codec.hpp"
#include "wans/tans.hpp"

namespace wans::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

ScalePolicy parse_scale_policy(const std::string& text) {
  if (text == "max-abs") return ScalePolicy::max_abs();
  const std::string prefix = "percentile:";
  if (text.rfind(prefix, 0) == 0) {
    try {
      std::size_t used = 0;
      const double q = std::stod(text.substr(prefix.size()), &used);
      if (used == text.size() - prefix.size()) return ScalePolicy::at_percentile(q);
    } catch (const std::exception&) {
    }
  }
  throw Error(ErrorCode::kInvalidArgument, "scale policy '" + text + "' (use max-abs or percentile:<q>)");
}

double mb(double bytes) { return bytes / kBytesPerMegabyte; }

double raw_quantized_bytes(std::uint64_t count, std::uint32_t bins) {
  const auto bits = static_cast<std::uint32_t>(std::ceil(std::log2(static_cast<double>(bins))));
  return static_cast<double>(count) * bits / 8.0;
}

void write_json(const std::string& path, const ordered_json& doc) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot create '" + path + "'");
  out << doc.dump(2) << "\n";
}

// Shared by stats, quantize and compress.
struct PrecisionChoice {
  std::optional<std::uint32_t> bins;
  std::optional<double> lambda;

  std::uint32_t resolve(std::uint32_t fallback) const {
    if (bins) return *bins;
    if (lambda) return bins_for_lambda(*lambda);
    return fallback;
  }
};

std::vector<Tensor> load(const std::string& manifest_path, TensorManifest& manifest) {
  manifest = load_manifest(manifest_path);
  return load_tensors(manifest);
}

// ----------------------------------------------------------------- stats

struct StatsArgs {
  std::string manifest;
  PrecisionChoice precision;
  std::string scale_policy = "max-abs";
  bool whole_network = false;
  std::string json;
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  TensorManifest manifest;
  const auto tensors = load(a.manifest, manifest);
  const auto policy = parse_scale_policy(a.scale_policy);
  const std::uint32_t bins = a.precision.resolve(5);

  struct Row {
    std::string name;
    std::uint64_t count;
    std::uint32_t bins;
    double entropy;
    double bound_bytes;
    double quantized_bytes;
    bool raw;
  };
  std::vector<Row> rows;
  std::vector<std::uint64_t> pooled(bins, 0);
  std::vector<std::vector<Symbol>> symbols(tensors.size());
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& t = tensors[i];
    const bool raw = !manifest.layers[i].compress;
    const std::uint32_t k = raw ? kRawLayerBins : bins;
    symbols[i] = quantize(t.values, make_quantizer(t.values, k, raw ? ScalePolicy::max_abs() : policy, t.name));
    if (!raw) {
      for (auto s : symbols[i]) ++pooled[s];
    }
    rows.push_back({t.name, t.values.size(), k, 0.0, 0.0, 0.0, raw});
  }
  std::optional<double> pooled_entropy;
  if (a.whole_network && std::accumulate(pooled.begin(), pooled.end(), std::uint64_t{0}) > 0) {
    pooled_entropy = shannon_entropy(Distribution(bins, pooled));
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    r.entropy = (!r.raw && pooled_entropy) ? *pooled_entropy : shannon_entropy(histogram(symbols[i], r.bins));
    r.quantized_bytes = raw_quantized_bytes(r.count, r.raw ? 256 : r.bins);
    // Raw layers are stored at 8 bits whatever their entropy.
    r.bound_bytes = r.raw ? r.quantized_bytes : r.entropy * static_cast<double>(r.count) / 8.0;
  }

  out << "entropy statistics (" << (pooled_entropy ? "whole-network" : "per-layer") << " histograms, 1 MB = 1e6 bytes)\n";
  out << std::left << std::setw(24) << "layer" << std::right << std::setw(12) << "|W|" << std::setw(6) << "bins"
      << std::setw(12) << "H(bit/w)" << std::setw(14) << "H*|W|(MB)" << std::setw(14) << "quant(MB)" << std::setw(6)
      << "mode" << "\n";
  std::uint64_t total_count = 0;
  double total_bound = 0.0;
  double total_quant = 0.0;
  const Row* peak_quant = nullptr;
  const Row* peak_bound = nullptr;
  for (const auto& r : rows) {
    out << std::left << std::setw(24) << r.name << std::right << std::setw(12) << r.count << std::setw(6) << r.bins
        << std::fixed << std::setprecision(4) << std::setw(12) << r.entropy << std::setprecision(6) << std::setw(14)
        << mb(r.bound_bytes) << std::setw(14) << mb(r.quantized_bytes) << std::setw(6) << (r.raw ? "raw" : "ans")
        << "\n";
    total_count += r.count;
    total_bound += r.bound_bytes;
    total_quant += r.quantized_bytes;
    if (!peak_quant || r.quantized_bytes > peak_quant->quantized_bytes) peak_quant = &r;
    if (!peak_bound || r.bound_bytes > peak_bound->bound_bytes) peak_bound = &r;
  }
  out << std::left << std::setw(24) << "TOTAL" << std::right << std::setw(12) << total_count << std::setw(6) << "-"
      << std::setw(12) << std::setprecision(4)
      << (total_count ? total_bound * 8.0 / static_cast<double>(total_count) : 0.0) << std::setprecision(6)
      << std::setw(14) << mb(total_bound) << std::setw(14) << mb(total_quant) << "\n";
  if (peak_quant) {
    const double cut = peak_quant->quantized_bytes > 0 ? 1.0 - peak_bound->bound_bytes / peak_quant->quantized_bytes : 0.0;
    out << "peak layer: quantized " << mb(peak_quant->quantized_bytes) << " MB (" << peak_quant->name << ") -> coded "
        << mb(peak_bound->bound_bytes) << " MB (" << peak_bound->name << "), " << std::setprecision(1) << 100.0 * cut
        << "% lower\n";
  }
  out.unsetf(std::ios::floatfield);

  ordered_json doc;
  doc["histograms"] = pooled_entropy ? "whole-network" : "per-layer";
  for (const auto& r : rows) {
    doc["layers"].push_back({{"name", r.name}, {"weights", r.count}, {"bins", r.bins}, {"entropy_bits", r.entropy},
                             {"entropy_bound_bytes", r.bound_bytes}, {"quantized_bytes", r.quantized_bytes},
                             {"mode", r.raw ? "raw" : "ans"}});
  }
  doc["total"] = {{"weights", total_count}, {"entropy_bound_bytes", total_bound}, {"quantized_bytes", total_quant}};
  write_json(a.json, doc);
  return kExitOk;
}

// -------------------------------------------------------------- quantize

struct QuantizeArgs {
  std::string manifest;
  std::string out_dir;
  PrecisionChoice precision;
  std::string scale_policy = "max-abs";
};

int cmd_quantize(const QuantizeArgs& a, std::ostream& out) {
  TensorManifest manifest;
  const auto tensors = load(a.manifest, manifest);
  const auto policy = parse_scale_policy(a.scale_policy);
  const std::uint32_t bins = a.precision.resolve(5);
  std::vector<Tensor> result;
  std::vector<bool> flags;
  out << std::left << std::setw(24) << "layer" << std::right << std::setw(6) << "bins" << std::setw(14) << "scale"
      << std::setw(14) << "step" << std::setw(14) << "mse" << "\n";
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& t = tensors[i];
    const bool raw = !manifest.layers[i].compress;
    const auto spec = make_quantizer(t.values, raw ? kRawLayerBins : bins, raw ? ScalePolicy::max_abs() : policy, t.name);
    out << std::left << std::setw(24) << t.name << std::right << std::setw(6) << spec.bins << std::setw(14)
        << std::setprecision(6) << spec.scale << std::setw(14) << spec.step() << std::setw(14)
        << quantization_mse(t.values, spec) << "\n";
    result.push_back({t.name, t.shape, dequantize(quantize(t.values, spec), spec)});
    flags.push_back(manifest.layers[i].compress);
  }
  const auto path = write_tensors(a.out_dir, result, flags);
  out << "wrote " << path.string() << "\n";
  return kExitOk;
}

// -------------------------------------------------------------- allocate

struct AllocateArgs {
  std::string manifest;
  double target_bytes = 0.0;
  double beta = 1.0;
  double learning_rate = 1.0;
  int iterations = 500;
  double lambda_min = 1.0;
  double lambda_max = 15.0;
  std::string scale_policy = "max-abs";
  std::string json;
};

struct Allocation {
  std::vector<std::size_t> layer_index;  // manifest index of each allocated layer
  AllocationResult result;
};

Allocation run_allocation(const std::vector<Tensor>& tensors, const TensorManifest& manifest, const AllocateArgs& a) {
  AllocationConfig cfg;
  cfg.target_bits = a.target_bytes * 8.0;
  cfg.beta = a.beta;
  cfg.learning_rate = a.learning_rate;
  cfg.iterations = a.iterations;
  cfg.lambda_min = a.lambda_min;
  cfg.lambda_max = a.lambda_max;
  std::vector<AllocationLayer> layers;
  Allocation alloc;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (!manifest.layers[i].compress) continue;
    layers.push_back({tensors[i].name, tensors[i].values});
    alloc.layer_index.push_back(i);
  }
  alloc.result = allocate(layers, cfg, parse_scale_policy(a.scale_policy));
  return alloc;
}

int cmd_allocate(const AllocateArgs& a, std::ostream& out, std::ostream& err) {
  TensorManifest manifest;
  const auto tensors = load(a.manifest, manifest);
  const auto alloc = run_allocation(tensors, manifest, a);
  const auto& r = alloc.result;

  out << "bin allocation (target " << std::setprecision(6) << mb(a.target_bytes) << " MB entropy, beta " << a.beta
      << ")\n";
  out << std::left << std::setw(24) << "layer" << std::right << std::setw(12) << "|W|" << std::setw(8) << "lambda"
      << std::setw(6) << "bins" << std::setw(12) << "H(bit/w)" << std::setw(14) << "H*|W|(MB)" << "\n";
  ordered_json doc;
  std::uint64_t total_count = 0;
  for (std::size_t j = 0; j < r.bins.size(); ++j) {
    const auto& layer = r.params.layers[j];
    const double h = layer.entropy.at(r.bins[j]);
    out << std::left << std::setw(24) << layer.name << std::right << std::setw(12) << layer.weight_count << std::fixed
        << std::setprecision(3) << std::setw(8) << r.lambdas[j] << std::setw(6) << r.bins[j] << std::setprecision(4)
        << std::setw(12) << h << std::setprecision(6) << std::setw(14)
        << mb(h * static_cast<double>(layer.weight_count) / 8.0) << "\n";
    out.unsetf(std::ios::floatfield);
    total_count += layer.weight_count;
    doc["layers"].push_back({{"name", layer.name}, {"weights", layer.weight_count}, {"lambda", r.lambdas[j]},
                             {"bins", r.bins[j]}, {"entropy_bits", h}});
  }
  out << std::fixed << std::setprecision(6);
  out << "TOTAL weights " << total_count << ", entropy at chosen bins " << mb(r.rounded_bits / 8.0)
      << " MB, interpolated " << mb(r.interpolated_bits / 8.0) << " MB, target " << mb(a.target_bytes) << " MB\n";
  out << "size criterion (sum of lambda over weights): " << size_criterion(r.params) << "\n";
  out << "relative entropy error " << r.final_loss << " after " << r.iterations << " iterations: "
      << (r.converged ? "converged" : "NOT CONVERGED") << "\n";
  out.unsetf(std::ios::floatfield);
  if (!r.converged) err << "warning: allocation did not reach the target within tolerance\n";

  doc["target_bytes"] = a.target_bytes;
  doc["achieved_bytes"] = r.rounded_bits / 8.0;
  doc["interpolated_bytes"] = r.interpolated_bits / 8.0;
  doc["converged"] = r.converged;
  write_json(a.json, doc);
  return kExitOk;
}

// -------------------------------------------------------------- compress

struct CompressArgs {
  std::string manifest;
  std::string out_path;
  std::uint32_t table_size = 256;
  std::uint32_t axis = 1;
  bool parallel = true;
  PrecisionChoice precision;
  std::optional<double> target_bytes;
  double beta = 1.0;
  std::string scale_policy = "max-abs";
  std::uint64_t seed = 0;
  std::string json;
};

int cmd_compress(const CompressArgs& a, std::ostream& out) {
  TensorManifest manifest;
  const auto tensors = load(a.manifest, manifest);
  const auto policy = parse_scale_policy(a.scale_policy);

  std::vector<std::uint32_t> bins(tensors.size(), a.precision.resolve(5));
  if (a.target_bytes) {
    AllocateArgs alloc_args;
    alloc_args.target_bytes = *a.target_bytes;
    alloc_args.beta = a.beta;
    alloc_args.scale_policy = a.scale_policy;
    const auto alloc = run_allocation(tensors, manifest, alloc_args);
    for (std::size_t j = 0; j < alloc.layer_index.size(); ++j) bins[alloc.layer_index[j]] = alloc.result.bins[j];
  }

  std::vector<LayerBundle> bundles;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& t = tensors[i];
    if (!manifest.layers[i].compress) {
      bundles.push_back(encode_raw_layer(t));
      continue;
    }
    LayerCodecOptions opts;
    opts.table_size = a.table_size;
    // Layers of lower rank than the split axis fall back to their last axis.
    opts.split_axis = std::min<std::uint32_t>(a.axis, static_cast<std::uint32_t>(t.shape.size() - 1));
    opts.parallel = a.parallel;
    bundles.push_back(encode_layer(t, make_quantizer(t.values, bins[i], policy, t.name), opts));
  }
  const auto bytes = write_model(bundles);
  write_file(a.out_path, bytes);

  out << "compressed " << bundles.size() << " layers, l=" << a.table_size
      << (a.parallel ? ", parallel streams" : ", single stream") << "\n";
  out << std::left << std::setw(24) << "layer" << std::right << std::setw(12) << "|W|" << std::setw(6) << "bins"
      << std::setw(9) << "streams" << std::setw(12) << "bytes" << std::setw(10) << "bit/w" << std::setw(6) << "mode"
      << "\n";
  ordered_json doc;
  std::uint64_t total_weights = 0;
  std::uint64_t coded_weights = 0;
  std::size_t coded_bytes = 0;
  for (const auto& b : bundles) {
    const auto rep = bundle_size_report(b);
    const auto n = b.symbol_count();
    out << std::left << std::setw(24) << b.name << std::right << std::setw(12) << n << std::setw(6)
        << b.quantizer.bins << std::setw(9) << b.streams.size() << std::setw(12) << rep.total_bytes << std::fixed
        << std::setprecision(4) << std::setw(10) << 8.0 * static_cast<double>(rep.total_bytes) / static_cast<double>(n)
        << std::setw(6) << (b.compressed ? "ans" : "raw") << "\n";
    out.unsetf(std::ios::floatfield);
    total_weights += n;
    if (b.compressed) {
      coded_weights += n;
      coded_bytes += rep.total_bytes;
    }
    doc["layers"].push_back({{"name", b.name}, {"weights", n}, {"bins", b.quantizer.bins},
                             {"streams", b.streams.size()}, {"bytes", rep.total_bytes},
                             {"payload_bytes", rep.payload_bytes}, {"compressed", b.compressed}});
  }
  const double overall = 8.0 * static_cast<double>(bytes.size()) / static_cast<double>(std::max<std::uint64_t>(1, total_weights));
  const double coded = coded_weights ? 8.0 * static_cast<double>(coded_bytes) / static_cast<double>(coded_weights) : 0.0;
  out << std::fixed << std::setprecision(4);
  out << "total " << bytes.size() << " bytes (" << std::setprecision(6) << mb(static_cast<double>(bytes.size()))
      << " MB), " << std::setprecision(4) << overall << " bits/weight overall, " << coded
      << " bits/weight in coded layers\n";
  out.unsetf(std::ios::floatfield);
  doc["total_bytes"] = bytes.size();
  doc["bits_per_weight"] = overall;
  doc["coded_bits_per_weight"] = coded;
  write_json(a.json, doc);
  return kExitOk;
}

// ------------------------------------------------------------ decompress

int cmd_decompress(const std::string& archive, const std::string& out_dir, std::ostream& out) {
  const auto bundles = read_model(read_file(archive));
  std::vector<Tensor> tensors;
  std::vector<bool> flags(bundles.size());
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    const auto& b = bundles[i];
    tensors.push_back({b.name, b.shape, dequantize(decode_layer(b), b.quantizer)});
    flags[i] = b.compressed;
  }
  const auto path = write_tensors(out_dir, tensors, flags);
  out << "decompressed " << bundles.size() << " layers to " << path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------- bench-decode

struct BenchArgs {
  std::string archive;
  int repeats = 5;
  std::uint64_t seed = 1;
  std::string schedule = "lockstep";
};

DecodeSchedule parse_schedule(const std::string& s) {
  if (s == "lockstep") return DecodeSchedule::kLockstep;
  if (s == "sequential") return DecodeSchedule::kSequential;
  if (s == "shuffled") return DecodeSchedule::kShuffled;
  if (s == "concurrent") return DecodeSchedule::kConcurrent;
  throw Error(ErrorCode::kInvalidArgument, "schedule '" + s + "'");
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  if (a.repeats < 1) throw Error(ErrorCode::kInvalidArgument, "repeats must be >= 1");
  const auto bundles = read_model(read_file(a.archive));
  DecodeOptions opts;
  opts.schedule = parse_schedule(a.schedule);
  opts.seed = a.seed;

  out << "decode benchmark: schedule " << a.schedule << ", median of " << a.repeats << " runs\n";
  out << std::left << std::setw(24) << "layer" << std::right << std::setw(9) << "streams" << std::setw(12)
      << "symbols" << std::setw(12) << "makespan" << std::setw(12) << "lookups" << std::setw(14) << "Msym/s" << "\n";
  std::uint64_t total_symbols = 0;
  std::uint64_t total_lookups = 0;
  std::uint64_t total_makespan = 0;
  double total_seconds = 0.0;
  for (const auto& b : bundles) {
    std::vector<double> seconds;
    LayerDecodeStats stats;
    for (int r = 0; r < a.repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto symbols = decode_layer(b, opts, &stats);
      const auto t1 = std::chrono::steady_clock::now();
      if (symbols.size() != b.symbol_count()) throw Error(ErrorCode::kCorruptStream, "short decode");
      seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::sort(seconds.begin(), seconds.end());
    const double median = seconds[seconds.size() / 2];
    const auto n = b.symbol_count();
    out << std::left << std::setw(24) << b.name << std::right << std::setw(9) << b.streams.size() << std::setw(12) << n
        << std::setw(12) << stats.makespan << std::setw(12) << stats.lookups << std::fixed << std::setprecision(2)
        << std::setw(14) << (median > 0 ? static_cast<double>(n) / median / 1e6 : 0.0) << "\n";
    out.unsetf(std::ios::floatfield);
    total_symbols += n;
    total_lookups += stats.lookups;
    total_makespan += stats.makespan;
    total_seconds += median;
  }
  out << "TOTAL symbols " << total_symbols << ", lookups " << total_lookups << ", makespan " << total_makespan
      << ", " << std::fixed << std::setprecision(2)
      << (total_seconds > 0 ? static_cast<double>(total_symbols) / total_seconds / 1e6 : 0.0) << " Msym/s\n";
  out.unsetf(std::ios::floatfield);
  return kExitOk;
}

// ----------------------------------------------------------------- table

int cmd_table(const std::string& counts_text, std::uint32_t table_size, std::ostream& out) {
  std::vector<std::uint64_t> counts;
  std::stringstream ss(counts_text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      counts.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "count '" + item + "' is not a nonnegative integer");
    }
  }
  if (counts.empty()) throw Error(ErrorCode::kInvalidArgument, "no counts given");
  const auto n = counts.size();
  const Distribution dist(n, std::move(counts));
  const DecodeTable table(normalize_freqs(dist, table_size));
  out << "state,symbol,nb_bits,new_x\n";
  for (std::size_t i = 0; i < table.entries().size(); ++i) {
    const auto& e = table.entries()[i];
    out << i << "," << static_cast<int>(e.symbol) << "," << static_cast<int>(e.nb_bits) << "," << e.new_x << "\n";
  }
  out << "# lut_footprint: " << lut_footprint(table) << " bytes\n";
  out << "# state_width_bits: " << state_width_bits(table) << "\n";
  return kExitOk;
}

void add_precision(CLI::App* cmd, PrecisionChoice& p) {
  auto* bins = cmd->add_option("--bins", p.bins, "Odd number of quantization bins (default 5)");
  auto* lambda = cmd->add_option("--lambda", p.lambda, "Precision lambda; bins = 2*round(lambda)+1");
  bins->excludes(lambda);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entropy coding of quantized neural-network weights with tabled ANS", "wans"};
  app.require_subcommand(1, 1);

  StatsArgs stats;
  auto* s = app.add_subcommand("stats", "Per-layer entropy and memory report");
  s->add_option("--manifest", stats.manifest, "Tensor manifest (JSON)")->required();
  add_precision(s, stats.precision);
  s->add_option("--scale-policy", stats.scale_policy, "max-abs | percentile:<q>");
  s->add_flag("--whole-network", stats.whole_network, "Pool one histogram over all coded layers");
  s->add_option("--json", stats.json, "Also write the report as JSON");

  QuantizeArgs quant;
  auto* q = app.add_subcommand("quantize", "Quantize and write dequantized tensors");
  q->add_option("--manifest", quant.manifest, "Tensor manifest (JSON)")->required();
  q->add_option("--out-dir", quant.out_dir, "Output directory")->required();
  add_precision(q, quant.precision);
  q->add_option("--scale-policy", quant.scale_policy, "max-abs | percentile:<q>");

  CompressArgs comp;
  auto* c = app.add_subcommand("compress", "Quantize and entropy-code a model into an archive");
  c->add_option("--manifest", comp.manifest, "Tensor manifest (JSON)")->required();
  c->add_option("-o,--out", comp.out_path, "Archive path")->required();
  c->add_option("-l,--table-size", comp.table_size, "tANS states (power of two, 2..4096)");
  c->add_option("--axis", comp.axis, "Split axis for parallel streams");
  c->add_flag("--parallel,!--no-parallel", comp.parallel, "One stream per channel (default on)");
  auto* cbins = c->add_option("--bins", comp.precision.bins, "Odd number of quantization bins (default 5)");
  auto* clambda = c->add_option("--lambda", comp.precision.lambda, "Precision lambda; bins = 2*round(lambda)+1");
  auto* ctarget = c->add_option("--target-bytes", comp.target_bytes, "Entropy goal in bytes; allocates bins per layer");
  cbins->excludes(clambda)->excludes(ctarget);
  clambda->excludes(ctarget);
  c->add_option("--beta", comp.beta, "Distortion weight for allocation");
  c->add_option("--scale-policy", comp.scale_policy, "max-abs | percentile:<q>");
  c->add_option("--seed", comp.seed, "Seed (encoding itself is deterministic)");
  c->add_option("--json", comp.json, "Also write the summary as JSON");

  std::string archive_in;
  std::string out_dir;
  auto* d = app.add_subcommand("decompress", "Decode an archive into dequantized tensors");
  d->add_option("archive", archive_in, "Archive path")->required();
  d->add_option("--out-dir", out_dir, "Output directory")->required();

  AllocateArgs alloc;
  auto* al = app.add_subcommand("allocate", "Choose per-layer bin counts for an entropy goal");
  al->add_option("--manifest", alloc.manifest, "Tensor manifest (JSON)")->required();
  al->add_option("--target-bytes", alloc.target_bytes, "Total entropy goal in bytes")->required();
  al->add_option("--beta", alloc.beta, "Distortion weight");
  al->add_option("--lr", alloc.learning_rate, "Learning rate");
  al->add_option("--iters", alloc.iterations, "Iteration budget");
  al->add_option("--lambda-min", alloc.lambda_min, "Lower precision bound");
  al->add_option("--lambda-max", alloc.lambda_max, "Upper precision bound");
  al->add_option("--scale-policy", alloc.scale_policy, "max-abs | percentile:<q>");
  al->add_option("--json", alloc.json, "Also write the report as JSON");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench-decode", "Time archive decoding");
  b->add_option("archive", bench.archive, "Archive path")->required();
  b->add_option("--repeats", bench.repeats, "Runs per layer (median reported)");
  b->add_option("--seed", bench.seed, "Seed for the shuffled schedule");
  b->add_option("--schedule", bench.schedule, "lockstep | sequential | shuffled | concurrent");

  std::string counts;
  std::uint32_t table_l = 256;
  auto* t = app.add_subcommand("table", "Dump the decode LUT for a histogram as CSV");
  t->add_option("--counts", counts, "Comma-separated symbol counts")->required();
  t->add_option("-l,--table-size", table_l, "tANS states");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    if (s->parsed()) return cmd_stats(stats, out);
    if (q->parsed()) return cmd_quantize(quant, out);
    if (c->parsed()) return cmd_compress(comp, out);
    if (d->parsed()) return cmd_decompress(archive_in, out_dir, out);
    if (al->parsed()) return cmd_allocate(alloc, out, err);
    if (b->parsed()) return cmd_bench(bench, out);
    if (t->parsed()) return cmd_table(counts, table_l, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_corrupt_data() ? kExitCorruptData : kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace wans::cli
