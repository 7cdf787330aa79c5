#include "camcover/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>

namespace camcover {

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'C', 'Q', 'N', 'E', 'T', '0',
                                        '1'};
constexpr std::array<char, 4> kTrainerMagic = {'T', 'R', 'S', 'T'};
constexpr std::uint32_t kVersion = 1;

void write_bytes(std::ostream& os, const void* data, std::size_t n) {
  os.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(os, b, 4);
}

void write_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(os, b, 8);
}

void write_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(os, bits);
}

std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("checkpoint truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double read_f64(std::istream& is) {
  const std::uint64_t bits = read_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void write_topology(std::ostream& os, const net::Topology& t) {
  write_u32(os, static_cast<std::uint32_t>(t.n_agents));
  write_u32(os, static_cast<std::uint32_t>(t.obs_dim));
  write_u32(os, static_cast<std::uint32_t>(t.extra_dim));
  write_u32(os, static_cast<std::uint32_t>(t.enc1));
  write_u32(os, static_cast<std::uint32_t>(t.enc2));
  write_u32(os, static_cast<std::uint32_t>(t.trunk));
  write_u32(os, static_cast<std::uint32_t>(t.hidden));
}

net::Topology read_topology(std::istream& is) {
  net::Topology t;
  t.n_agents = static_cast<int>(read_u32(is));
  t.obs_dim = static_cast<int>(read_u32(is));
  t.extra_dim = static_cast<int>(read_u32(is));
  t.enc1 = static_cast<int>(read_u32(is));
  t.enc2 = static_cast<int>(read_u32(is));
  t.trunk = static_cast<int>(read_u32(is));
  t.hidden = static_cast<int>(read_u32(is));
  return t;
}

void write_tensors(std::ostream& os, const net::NetworkParams& p) {
  const auto views = net::tensor_views(p);
  write_u32(os, static_cast<std::uint32_t>(views.size()));
  for (const auto& view : views) {
    write_u64(os, static_cast<std::uint64_t>(view.size()));
    for (Eigen::Index i = 0; i < view.size(); ++i) write_f64(os, view[i]);
  }
}

void read_tensors(std::istream& is, net::NetworkParams& p) {
  const auto views = net::tensor_views(p);
  const std::uint32_t count = read_u32(is);
  if (count != views.size())
    throw std::runtime_error("checkpoint tensor count mismatch");
  for (auto view : views) {
    const std::uint64_t n = read_u64(is);
    if (n != static_cast<std::uint64_t>(view.size()))
      throw std::runtime_error("checkpoint tensor size mismatch");
    for (Eigen::Index i = 0; i < view.size(); ++i) view[i] = read_f64(is);
  }
}

net::NetworkParams read_network(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic)
    throw std::runtime_error("not a network checkpoint (bad magic)");
  const std::uint32_t version = read_u32(is);
  if (version != kVersion)
    throw std::runtime_error("unsupported checkpoint version " +
                             std::to_string(version));
  const net::Topology topo = read_topology(is);
  topo.validate();
  net::NetworkParams p = net::init_params(topo, 0);
  read_tensors(is, p);
  return p;
}

void write_network(std::ostream& os, const net::NetworkParams& p) {
  write_bytes(os, kMagic.data(), kMagic.size());
  write_u32(os, kVersion);
  write_topology(os, p.topo);
  write_tensors(os, p);
}

}  // namespace

TopologyMismatchError::TopologyMismatchError(const net::Topology& found_,
                                             const net::Topology& expected_)
    : std::runtime_error("checkpoint topology [" + found_.describe() +
                         "] does not match expected [" + expected_.describe() +
                         "]"),
      found(found_),
      expected(expected_) {}

void save_checkpoint(const std::string& path, const net::NetworkParams& online,
                     const TrainerStateSnapshot* trainer_state) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);

  write_network(os, online);
  if (trainer_state != nullptr) {
    write_bytes(os, kTrainerMagic.data(), kTrainerMagic.size());
    write_u64(os, static_cast<std::uint64_t>(trainer_state->env_steps));
    write_u64(os, static_cast<std::uint64_t>(trainer_state->episodes));
    write_f64(os, trainer_state->epsilon);
    write_u64(os, trainer_state->adam.t);
    write_u32(os, static_cast<std::uint32_t>(trainer_state->adam.m.size()));
    for (const auto& m : trainer_state->adam.m) {
      write_u64(os, static_cast<std::uint64_t>(m.size()));
      for (Eigen::Index i = 0; i < m.size(); ++i) write_f64(os, m[i]);
    }
    for (const auto& v : trainer_state->adam.v) {
      write_u64(os, static_cast<std::uint64_t>(v.size()));
      for (Eigen::Index i = 0; i < v.size(); ++i) write_f64(os, v[i]);
    }
    write_network(os, trainer_state->target);
  }
  if (!os) throw std::runtime_error("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);

  Checkpoint ckpt;
  ckpt.online = read_network(is);

  std::array<char, 4> tmagic{};
  is.read(tmagic.data(), tmagic.size());
  if (!is) return ckpt;  // network-only container
  if (tmagic != kTrainerMagic)
    throw std::runtime_error("corrupt checkpoint trailer: " + path);

  TrainerStateSnapshot st;
  st.env_steps = static_cast<std::int64_t>(read_u64(is));
  st.episodes = static_cast<std::int64_t>(read_u64(is));
  st.epsilon = read_f64(is);
  st.adam.t = read_u64(is);
  const std::uint32_t n_tensors = read_u32(is);
  st.adam.m.resize(n_tensors);
  st.adam.v.resize(n_tensors);
  for (auto& m : st.adam.m) {
    m.resize(static_cast<Eigen::Index>(read_u64(is)));
    for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = read_f64(is);
  }
  for (auto& v : st.adam.v) {
    v.resize(static_cast<Eigen::Index>(read_u64(is)));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = read_f64(is);
  }
  st.target = read_network(is);
  ckpt.trainer = std::move(st);
  return ckpt;
}

net::NetworkParams load_network_checked(const std::string& path,
                                        const net::Topology& expected) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  net::NetworkParams p = read_network(is);
  if (!(p.topo == expected)) throw TopologyMismatchError(p.topo, expected);
  return p;
}

}  // namespace camcover
