#include "lae/checkpoint.hpp"

#include "lae/error.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace lae {

namespace {

constexpr std::array<char, 8> kMagic = {'L', 'A', 'E', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw FormatError("checkpoint truncated");
  }
  return value;
}

} // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint) {
  const Network& net = checkpoint.network;
  const auto dims = net.arch();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (std::size_t d : dims) {
    put<std::uint64_t>(out, d);
  }
  put<std::uint8_t>(out, net.freeze_extractor() ? 1 : 0);
  put<std::uint8_t>(out, checkpoint.anchor_mae ? 1 : 0);
  if (checkpoint.anchor_mae) {
    put<double>(out, *checkpoint.anchor_mae);
  }
  for (const auto& layer : net.layers()) {
    put<std::uint8_t>(out, layer.activation == Activation::Relu ? 1 : 0);
    out.write(reinterpret_cast<const char*>(layer.weights.data()),
              static_cast<std::streamsize>(layer.weights.size() * sizeof(double)));
    out.write(reinterpret_cast<const char*>(layer.bias.data()),
              static_cast<std::streamsize>(layer.bias.size() * sizeof(double)));
  }
  if (!out) {
    throw IoError("failed writing checkpoint");
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw FormatError("not a checkpoint file (bad magic)");
  }
  if (const auto version = get<std::uint32_t>(in); version != kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto num_dims = get<std::uint32_t>(in);
  if (num_dims < 2 || num_dims > 1024) {
    throw FormatError("implausible layer count in checkpoint");
  }
  std::vector<std::size_t> dims(num_dims);
  for (auto& d : dims) {
    d = get<std::uint64_t>(in);
    if (d < 1 || d > (1u << 24)) {
      throw FormatError("implausible dimension in checkpoint");
    }
  }
  const bool freeze = get<std::uint8_t>(in) != 0;
  Checkpoint checkpoint;
  if (get<std::uint8_t>(in) != 0) {
    checkpoint.anchor_mae = get<double>(in);
  }

  std::vector<LinearLayer> layers;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    LinearLayer layer;
    const auto act = get<std::uint8_t>(in);
    if (act > 1) {
      throw FormatError("unknown activation code " + std::to_string(act));
    }
    layer.activation = act == 1 ? Activation::Relu : Activation::None;
    layer.weights.resize(static_cast<Eigen::Index>(dims[i + 1]), static_cast<Eigen::Index>(dims[i]));
    layer.bias.resize(static_cast<Eigen::Index>(dims[i + 1]));
    const auto wbytes = static_cast<std::streamsize>(layer.weights.size() * sizeof(double));
    const auto bbytes = static_cast<std::streamsize>(layer.bias.size() * sizeof(double));
    if (!in.read(reinterpret_cast<char*>(layer.weights.data()), wbytes) ||
        !in.read(reinterpret_cast<char*>(layer.bias.data()), bbytes)) {
      throw FormatError("checkpoint truncated in layer " + std::to_string(i));
    }
    layers.push_back(std::move(layer));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("trailing bytes after checkpoint payload");
  }
  checkpoint.network = Network(std::move(layers), freeze);
  return checkpoint;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  write_checkpoint(out, checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open checkpoint " + path.string());
  }
  return read_checkpoint(in);
}

} // namespace lae
