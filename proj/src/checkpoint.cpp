#include "hab/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "hab/errors.hpp"

namespace hab {

namespace {

constexpr char kMagic[4] = {'S', 'A', 'C', 'K'};
constexpr std::uint16_t kVersion = 1;
constexpr std::size_t kNetworks = 5;
constexpr std::size_t kOptimizers = 4;
constexpr const char* kWhat = "checkpoint";

using detail::write_le;

template <typename T>
T read_le(std::istream& in) {
  return detail::read_le<T>(in, kWhat);
}

void write_string(std::ostream& out, const std::string& text) {
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_string(std::istream& in) {
  const auto length = read_le<std::uint32_t>(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), length)) throw FormatError("checkpoint file truncated");
  return text;
}

void write_vector(std::ostream& out, const sac::Vector& values) {
  write_le<std::uint64_t>(out, static_cast<std::uint64_t>(values.size()));
  for (double v : values) write_le<double>(out, v);
}

sac::Vector read_vector(std::istream& in, std::uint64_t limit) {
  const auto count = read_le<std::uint64_t>(in);
  if (count > limit) throw FormatError("checkpoint array length " + std::to_string(count) + " is implausible");
  sac::Vector values(static_cast<Eigen::Index>(count));
  for (auto& v : values) v = read_le<double>(in);
  return values;
}

std::string shape_string(std::span<const std::size_t> sizes) {
  std::string text;
  for (std::size_t i = 0; i < sizes.size(); ++i) text += (i ? "-" : "") + std::to_string(sizes[i]);
  return text;
}

std::size_t parameter_count(std::span<const std::size_t> sizes) {
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) total += sizes[l + 1] * (sizes[l] + 1);
  return total;
}

}  // namespace

Checkpoint capture(const sac::SacAgent& agent) {
  Checkpoint out;
  out.log_alpha = agent.log_alpha();
  out.networks.push_back({{agent.actor().sizes().begin(), agent.actor().sizes().end()},
                          agent.actor().params()});
  for (const sac::Mlp* critic : agent.critics()) {
    out.networks.push_back({{critic->sizes().begin(), critic->sizes().end()}, critic->params()});
  }
  for (const sac::Adam* optimizer : agent.optimizers()) {
    out.optimizers.push_back(optimizer->state());
  }
  return out;
}

void restore(const Checkpoint& checkpoint, sac::SacAgent& agent) {
  std::vector<sac::Mlp*> networks{&agent.actor()};
  for (sac::Mlp* critic : agent.critics()) networks.push_back(critic);
  if (checkpoint.networks.size() != networks.size()) {
    throw ShapeError("checkpoint holds " + std::to_string(checkpoint.networks.size()) +
                     " networks, expected " + std::to_string(networks.size()));
  }
  for (std::size_t i = 0; i < networks.size(); ++i) {
    const auto expected = networks[i]->sizes();
    const auto& stored = checkpoint.networks[i].sizes;
    if (!std::equal(expected.begin(), expected.end(), stored.begin(), stored.end())) {
      throw ShapeError("checkpoint network " + std::to_string(i) + " has shape " +
                       shape_string(stored) + ", the configured network is " +
                       shape_string(expected));
    }
  }
  const auto optimizers = agent.optimizers();
  if (!checkpoint.optimizers.empty() && checkpoint.optimizers.size() != optimizers.size()) {
    throw ShapeError("checkpoint optimiser count does not match");
  }
  for (std::size_t i = 0; i < networks.size(); ++i) networks[i]->params() = checkpoint.networks[i].params;
  for (std::size_t i = 0; i < checkpoint.optimizers.size(); ++i) {
    try {
      optimizers[i]->restore(checkpoint.optimizers[i]);
    } catch (const ShapeMismatch& e) {
      throw ShapeError(std::string("checkpoint ") + e.what());
    }
  }
  agent.set_log_alpha(checkpoint.log_alpha);
}

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  out.write(kMagic, 4);
  write_le<std::uint16_t>(out, kVersion);
  write_string(out, checkpoint.config.dump());
  write_le<std::uint64_t>(out, checkpoint.counters.episodes);
  write_le<std::uint64_t>(out, checkpoint.counters.total_strides);
  write_le<std::uint64_t>(out, checkpoint.counters.updates);
  write_string(out, checkpoint.rng_state);
  write_le<double>(out, checkpoint.log_alpha);

  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.networks.size()));
  for (const NetworkBlob& net : checkpoint.networks) {
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(net.sizes.size()));
    for (std::size_t s : net.sizes) write_le<std::uint64_t>(out, s);
    write_vector(out, net.params);
  }
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.optimizers.size()));
  for (const sac::Adam::State& state : checkpoint.optimizers) {
    write_le<std::uint64_t>(out, static_cast<std::uint64_t>(state.steps));
    write_le<double>(out, state.beta1_power);
    write_le<double>(out, state.beta2_power);
    write_vector(out, state.first_moment);
    write_vector(out, state.second_moment);
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw FormatError(path.string() + " is not a checkpoint (bad magic)");
  }
  const auto version = read_le<std::uint16_t>(in);
  if (version != kVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint out;
  try {
    out.config = nlohmann::json::parse(read_string(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("checkpoint config echo is not valid JSON: ") + e.what());
  }
  out.counters.episodes = read_le<std::uint64_t>(in);
  out.counters.total_strides = read_le<std::uint64_t>(in);
  out.counters.updates = read_le<std::uint64_t>(in);
  out.rng_state = read_string(in);
  out.log_alpha = read_le<double>(in);

  const auto networks = read_le<std::uint32_t>(in);
  if (networks != kNetworks) {
    throw ShapeError("checkpoint holds " + std::to_string(networks) + " networks, expected 5");
  }
  for (std::uint32_t i = 0; i < networks; ++i) {
    NetworkBlob net;
    const auto layers = read_le<std::uint32_t>(in);
    if (layers < 2 || layers > 64) throw ShapeError("checkpoint network has an implausible layer count");
    for (std::uint32_t l = 0; l < layers; ++l) {
      const auto size = read_le<std::uint64_t>(in);
      if (size == 0 || size > (1u << 20)) throw ShapeError("checkpoint layer size out of range");
      net.sizes.push_back(static_cast<std::size_t>(size));
    }
    const std::size_t expected = parameter_count(net.sizes);
    net.params = read_vector(in, expected);
    if (static_cast<std::size_t>(net.params.size()) != expected) {
      throw ShapeError("checkpoint network " + std::to_string(i) + " stores " +
                       std::to_string(net.params.size()) + " parameters, its shape needs " +
                       std::to_string(expected));
    }
    out.networks.push_back(std::move(net));
  }
  const auto optimizers = read_le<std::uint32_t>(in);
  if (optimizers != 0 && optimizers != kOptimizers) {
    throw ShapeError("checkpoint optimiser count " + std::to_string(optimizers) + " is invalid");
  }
  for (std::uint32_t i = 0; i < optimizers; ++i) {
    sac::Adam::State state;
    state.steps = static_cast<long>(read_le<std::uint64_t>(in));
    state.beta1_power = read_le<double>(in);
    state.beta2_power = read_le<double>(in);
    state.first_moment = read_vector(in, std::uint64_t{1} << 32);
    state.second_moment = read_vector(in, std::uint64_t{1} << 32);
    out.optimizers.push_back(std::move(state));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("checkpoint has trailing bytes");
  }
  return out;
}

}  // namespace hab
