#include "ppoc/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace ppoc {

namespace {

constexpr char kMagic[4] = {'P', 'P', 'O', 'C'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(b[i]) << (8 * i);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
  const uint32_t n = get_u32(is);
  if (n > (1u << 20)) throw ContractViolation("checkpoint: unreasonable string length");
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

void put_params(std::ostream& os, const ParameterSet& ps) {
  for (const auto& p : ps) {
    put_string(os, p->name);
    put_u32(os, static_cast<uint32_t>(p->value.rank()));
    for (int d : p->value.shape) put_u32(os, static_cast<uint32_t>(d));
    for (double v : p->value.values) put_f64(os, v);
  }
}

void read_params(std::istream& is, ParameterSet& ps, size_t expected, const std::string& path) {
  for (size_t i = 0; i < expected; ++i) {
    const std::string name = get_string(is);
    Param* p = ps.find(name);
    if (!p)
      throw ContractViolation("checkpoint " + path + ": unexpected parameter " + name);
    const uint32_t rank = get_u32(is);
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(get_u32(is));
    if (shape != p->value.shape)
      throw ContractViolation("checkpoint " + path + ": shape mismatch for " + name);
    for (double& v : p->value.values) v = get_f64(is);
    if (!is) throw ContractViolation("checkpoint " + path + ": truncated file");
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const OptionAgent& agent, const std::string& env_name) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ContractViolation("cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  const AgentConfig& c = agent.config();
  put_u32(os, static_cast<uint32_t>(c.n_options));
  put_u32(os, static_cast<uint32_t>(c.obs_dim));
  put_u32(os, static_cast<uint32_t>(c.action_dim));
  put_u32(os, static_cast<uint32_t>(c.hidden));
  put_f64(os, c.action_low);
  put_f64(os, c.action_high);
  put_string(os, env_name);
  put_u32(os, static_cast<uint32_t>(agent.actor().count() + agent.critic().count()));
  put_params(os, agent.actor());
  put_params(os, agent.critic());
  if (!os) throw ContractViolation("failed writing checkpoint: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ContractViolation("cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw ContractViolation("not a checkpoint file: " + path);
  const uint32_t version = get_u32(is);
  if (version != kVersion)
    throw ContractViolation("checkpoint " + path + ": unsupported format version " +
                            std::to_string(version));
  AgentConfig cfg;
  cfg.n_options = static_cast<int>(get_u32(is));
  cfg.obs_dim = static_cast<int>(get_u32(is));
  cfg.action_dim = static_cast<int>(get_u32(is));
  cfg.hidden = static_cast<int>(get_u32(is));
  cfg.action_low = get_f64(is);
  cfg.action_high = get_f64(is);
  const std::string env_name = get_string(is);
  const uint32_t n_params = get_u32(is);
  if (!is) throw ContractViolation("checkpoint " + path + ": truncated header");

  Rng scratch(0, 0);
  LoadedCheckpoint out{OptionAgent(cfg, scratch), env_name};
  if (n_params != out.agent.actor().count() + out.agent.critic().count())
    throw ContractViolation("checkpoint " + path + ": parameter count mismatch");
  read_params(is, out.agent.actor(), out.agent.actor().count(), path);
  read_params(is, out.agent.critic(), out.agent.critic().count(), path);
  return out;
}

}  // namespace ppoc
