#ifndef PPOC_CHECKPOINT_HPP_
#define PPOC_CHECKPOINT_HPP_

#include <string>

#include "ppoc/agent.hpp"

namespace ppoc {

// Flat little-endian binary checkpoint. Layout:
//   magic "PPOC" | u32 format version (1)
//   u32 n_options | u32 obs_dim | u32 action_dim | u32 hidden
//   f64 action_low | f64 action_high
//   u32 env name length | env name bytes
//   u32 parameter count, then per parameter in registration order:
//     u32 name length | name bytes | u32 rank | u32 dims... | f64 values...
// Values round-trip bit-exactly.
void save_checkpoint(const std::string& path, const OptionAgent& agent, const std::string& env_name);

struct LoadedCheckpoint {
  OptionAgent agent;
  std::string env_name;
};
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace ppoc

#endif  // PPOC_CHECKPOINT_HPP_
