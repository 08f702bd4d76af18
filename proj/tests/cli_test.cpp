#include "wans/cli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include "json.hpp"
#include <sstream>

#include "support/fixtures.hpp"
#include "wans/allocation.hpp"
#include "wans/container.hpp"

namespace wans {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::size_t count_lines(const std::string& s, const std::string& prefix = "") {
  std::istringstream in(s);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += line.rfind(prefix, 0) == 0 && !line.empty();
  return n;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    tensors = {testing::gaussian_tensor("conv1", {16, 3, 3, 3}, 0.2, 1),
               testing::gaussian_tensor("conv2", {64, 32, 3, 3}, 0.05, 2),
               testing::gaussian_tensor("fc", {10, 64}, 0.1, 3)};
    manifest = write_tensors(dir.path() / "in", tensors, {false, true, true}).string();
  }
  std::string path(const std::string& name) const { return (dir.path() / name).string(); }

  testing::TempDir dir;
  std::vector<Tensor> tensors;
  std::string manifest;
};

TEST(CliTable, SixtyFourStates) {
  const auto r = run({"table", "--counts", "3,1", "-l", "64"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("state,symbol,nb_bits,new_x\n", 0), 0u);
  EXPECT_EQ(count_lines(r.out) - count_lines(r.out, "#") - 1, 64u);
  EXPECT_NE(r.out.find("# lut_footprint: 192 bytes"), std::string::npos);
  EXPECT_NE(r.out.find("# state_width_bits: 7"), std::string::npos);
}

TEST(CliTable, RejectsBadInput) {
  EXPECT_EQ(run({"table", "--counts", "3,x"}).code, cli::kExitInputError);
  EXPECT_EQ(run({"table", "--counts", "3,1", "-l", "48"}).code, cli::kExitInputError);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitInputError);
  EXPECT_EQ(run({}).code, cli::kExitInputError);
}

TEST_F(CliTest, CompressDecompressMatchesQuantize) {
  ASSERT_EQ(run({"compress", "--manifest", manifest, "-o", path("m.answ"), "--bins", "7"}).code, 0);
  ASSERT_EQ(run({"decompress", path("m.answ"), "--out-dir", path("dec")}).code, 0);
  ASSERT_EQ(run({"quantize", "--manifest", manifest, "--out-dir", path("q"), "--bins", "7"}).code, 0);
  const auto decoded = load_tensors(load_manifest(path("dec") + "/manifest.json"));
  const auto quantized = load_tensors(load_manifest(path("q") + "/manifest.json"));
  ASSERT_EQ(decoded.size(), 3u);
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    EXPECT_EQ(decoded[i].name, tensors[i].name);
    EXPECT_EQ(decoded[i].shape, tensors[i].shape);
    EXPECT_EQ(decoded[i].values, quantized[i].values) << decoded[i].name;
  }
}

TEST_F(CliTest, CompressIsDeterministic) {
  ASSERT_EQ(run({"compress", "--manifest", manifest, "-o", path("a.answ"), "--seed", "1"}).code, 0);
  ASSERT_EQ(run({"compress", "--manifest", manifest, "-o", path("b.answ"), "--seed", "99"}).code, 0);
  EXPECT_EQ(read_file(path("a.answ")), read_file(path("b.answ")));
}

TEST_F(CliTest, LargerTablesGiveSmallerArchives) {
  std::vector<std::size_t> sizes;
  for (const char* l : {"64", "128", "256"}) {
    const auto out = path(std::string("l") + l + ".answ");
    ASSERT_EQ(run({"compress", "--manifest", manifest, "-o", out, "-l", l, "--bins", "9", "--no-parallel"}).code, 0);
    sizes.push_back(read_file(out).size());
  }
  EXPECT_GT(sizes[0], sizes[1]);
  EXPECT_GT(sizes[1], sizes[2]);
}

TEST_F(CliTest, ParallelFlagControlsStreamCount) {
  ASSERT_EQ(run({"compress", "--manifest", manifest, "-o", path("p.answ")}).code, 0);
  ASSERT_EQ(run({"compress", "--manifest", manifest, "-o", path("s.answ"), "--no-parallel"}).code, 0);
  const auto p = read_model(read_file(path("p.answ")));
  const auto s = read_model(read_file(path("s.answ")));
  EXPECT_EQ(p[1].streams.size(), 32u);
  EXPECT_EQ(p[2].streams.size(), 64u);
  EXPECT_EQ(s[1].streams.size(), 1u);
  EXPECT_FALSE(p[0].compressed);
}

TEST(CliCompress, LowEntropyModelCodesBelowOneBitPerWeight) {
  testing::TempDir dir;
  // Mostly zeros with rare outliers: 3 bins, H well under a bit.
  auto t = testing::gaussian_tensor("sparse", {256, 64, 3, 3}, 0.01, 9);
  for (std::size_t i = 0; i < t.values.size(); i += 97) t.values[i] = (i % 2 ? 1.0f : -1.0f);
  const std::vector<Tensor> model{t};
  const auto m = write_tensors(dir.path(), model).string();
  const auto json = (dir.path() / "c.json").string();
  const auto r = run({"compress", "--manifest", m, "-o", (dir.path() / "c.answ").string(), "--bins", "3", "--json", json});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(read_json(json)["bits_per_weight"].get<double>(), 1.0);
}

TEST_F(CliTest, AllocateReachesThirteenBinsOnSingleLayer) {
  const auto& w = tensors[1].values;
  const std::vector<Tensor> one{tensors[1]};
  const auto m = write_tensors(dir.path() / "one", one).string();
  const double h13 = entropy_table(w, std::vector<std::uint32_t>{13}).at(13);
  std::ostringstream target;
  target.precision(17);
  target << h13 * static_cast<double>(w.size()) / 8.0;
  const auto json = path("alloc.json");
  const auto r = run({"allocate", "--manifest", m, "--target-bytes", target.str(), "--json", json});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = read_json(json);
  EXPECT_EQ(doc["layers"][0]["bins"].get<int>(), 13);
  EXPECT_TRUE(doc["converged"].get<bool>());
  EXPECT_NE(r.out.find("converged"), std::string::npos);
}

TEST_F(CliTest, AllocateInfeasibleTargetIsInputError) {
  const auto r = run({"allocate", "--manifest", manifest, "--target-bytes", "1"});
  EXPECT_EQ(r.code, cli::kExitInputError);
  EXPECT_NE(r.err.find("achievable range"), std::string::npos);
}

TEST_F(CliTest, CompressWithTargetBytes) {
  const auto r = run({"compress", "--manifest", manifest, "-o", path("t.answ"), "--target-bytes", "5000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto model = read_model(read_file(path("t.answ")));
  for (const auto& b : model) {
    if (b.compressed) EXPECT_EQ(b.quantizer.bins % 2, 1u);
  }
}

TEST_F(CliTest, StatsTotalsAreSumsOfRows) {
  const auto json = path("stats.json");
  const auto r = run({"stats", "--manifest", manifest, "--bins", "9", "--json", json});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = read_json(json);
  double bound = 0.0, quant = 0.0;
  std::uint64_t weights = 0;
  for (const auto& l : doc["layers"]) {
    bound += l["entropy_bound_bytes"].get<double>();
    quant += l["quantized_bytes"].get<double>();
    weights += l["weights"].get<std::uint64_t>();
  }
  EXPECT_DOUBLE_EQ(doc["total"]["entropy_bound_bytes"].get<double>(), bound);
  EXPECT_DOUBLE_EQ(doc["total"]["quantized_bytes"].get<double>(), quant);
  EXPECT_EQ(doc["total"]["weights"].get<std::uint64_t>(), weights);
  EXPECT_EQ(doc["layers"][0]["mode"], "raw");
  EXPECT_DOUBLE_EQ(doc["layers"][0]["quantized_bytes"].get<double>(), 16.0 * 27.0);
  EXPECT_NE(r.out.find("TOTAL"), std::string::npos);
  EXPECT_NE(r.out.find("peak layer"), std::string::npos);
}

TEST(CliStats, ConstantLayerHasZeroEntropy) {
  testing::TempDir dir;
  const std::vector<Tensor> model{{"flat", {4, 4}, std::vector<float>(16, 0.5f)}};
  const auto m = write_tensors(dir.path(), model).string();
  const auto json = (dir.path() / "s.json").string();
  ASSERT_EQ(run({"stats", "--manifest", m, "--json", json}).code, 0);
  EXPECT_EQ(read_json(json)["layers"][0]["entropy_bits"].get<double>(), 0.0);
}

TEST_F(CliTest, WholeNetworkStatsUseOneEntropy) {
  const auto json = path("w.json");
  ASSERT_EQ(run({"stats", "--manifest", manifest, "--whole-network", "--json", json}).code, 0);
  const auto doc = read_json(json);
  EXPECT_EQ(doc["histograms"], "whole-network");
  EXPECT_EQ(doc["layers"][1]["entropy_bits"], doc["layers"][2]["entropy_bits"]);
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(run({"stats", "--manifest", path("missing.json")}).code, cli::kExitInputError);
  EXPECT_EQ(run({"stats", "--manifest", manifest, "--bins", "4"}).code, cli::kExitInputError);
  EXPECT_EQ(run({"stats", "--manifest", manifest, "--bins", "5", "--lambda", "2"}).code, cli::kExitInputError);
  EXPECT_EQ(run({"stats", "--manifest", manifest, "--scale-policy", "median"}).code, cli::kExitInputError);

  ASSERT_EQ(run({"compress", "--manifest", manifest, "-o", path("x.answ")}).code, 0);
  auto bytes = read_file(path("x.answ"));
  bytes.resize(bytes.size() - 5);
  write_file(path("trunc.answ"), bytes);
  const auto r = run({"decompress", path("trunc.answ"), "--out-dir", path("o")});
  EXPECT_EQ(r.code, cli::kExitCorruptData);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  bytes[0] = 'Z';
  write_file(path("magic.answ"), bytes);
  EXPECT_EQ(run({"bench-decode", path("magic.answ")}).code, cli::kExitCorruptData);
}

TEST_F(CliTest, BenchReportsExactLookups) {
  ASSERT_EQ(run({"compress", "--manifest", manifest, "-o", path("b.answ")}).code, 0);
  std::uint64_t total = 0;
  std::uint64_t coded = 0;
  for (const auto& b : read_model(read_file(path("b.answ")))) {
    total += b.symbol_count();
    // Raw layers are copied out without table lookups.
    if (b.compressed) coded += b.symbol_count();
  }
  for (const char* schedule : {"lockstep", "sequential", "shuffled", "concurrent"}) {
    const auto r = run({"bench-decode", path("b.answ"), "--repeats", "2", "--schedule", schedule});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto expected = "TOTAL symbols " + std::to_string(total) + ", lookups " + std::to_string(coded);
    EXPECT_NE(r.out.find(expected), std::string::npos) << r.out;
  }
}

TEST(CliHelp, ListsSubcommands) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* cmd : {"stats", "quantize", "compress", "decompress", "allocate", "bench-decode", "table"}) {
    EXPECT_NE(r.out.find(cmd), std::string::npos) << cmd;
  }
}

}  // namespace
}  // namespace wans
