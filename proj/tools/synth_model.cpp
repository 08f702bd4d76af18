// Writes a small synthetic CNN (Gaussian weights) as raw float32 tensors plus
// a manifest, for trying out the wans tool.

#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "wans/container.hpp"
#include "wans/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic model generator"};
  std::string out_dir;
  std::uint64_t seed = 1;
  double width = 1.0;
  app.add_option("--out-dir", out_dir, "Output directory")->required();
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--width", width, "Channel multiplier")->check(CLI::Range(0.125, 8.0));
  CLI11_PARSE(app, argc, argv);

  const auto ch = [&](double c) { return std::max<std::uint32_t>(1, static_cast<std::uint32_t>(c * width)); };
  struct Spec {
    std::string name;
    wans::Shape shape;
    bool compress;
  };
  const std::vector<Spec> specs{
      {"conv_in", {ch(32), 3, 3, 3}, false},       {"block1.conv", {ch(64), ch(32), 3, 3}, true},
      {"block2.conv", {ch(128), ch(64), 3, 3}, true}, {"block3.conv", {ch(256), ch(128), 3, 3}, true},
      {"block4.conv", {ch(256), ch(256), 3, 3}, true}, {"fc", {10, ch(256)}, false},
  };

  std::mt19937_64 rng(seed);
  std::vector<wans::Tensor> tensors;
  std::vector<bool> flags;
  for (const auto& s : specs) {
    // He-style init: sigma shrinks with fan-in.
    std::uint64_t fan_in = 1;
    for (std::size_t i = 1; i < s.shape.size(); ++i) fan_in *= s.shape[i];
    std::normal_distribution<float> normal(0.0f, static_cast<float>(std::sqrt(2.0 / static_cast<double>(fan_in))));
    wans::Tensor t{s.name, s.shape, std::vector<float>(wans::element_count(s.shape))};
    for (auto& v : t.values) v = normal(rng);
    tensors.push_back(std::move(t));
    flags.push_back(s.compress);
  }
  try {
    const auto path = wans::write_tensors(out_dir, tensors, flags);
    std::cout << "wrote " << path.string() << "\n";
  } catch (const wans::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
