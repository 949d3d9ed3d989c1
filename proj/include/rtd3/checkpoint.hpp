#pragma once

#include <string>

#include "rtd3/agent.hpp"

namespace rtd3 {

struct Checkpoint {
  std::string scenario;  // canonical scenario the agent was trained on
  Agent agent;
};

// Binary layout, little-endian:
//   magic "RTD3CKPT"  version:u8
//   variant:str  history:u64  obs_dim:u64  act_dim:u64  hidden:u64
//   max_action:f64  scenario:str  networks:u64
//   per network: role:str  slots:u64
//     per slot: name:str rows:u64 cols:u64, then rows*cols f64 row-major
// where str is a u64 length followed by the bytes. Optimizer moments are
// not stored; a loaded agent is for evaluation or fresh fine-tuning.
void save_checkpoint(const std::string& path, const Agent& agent,
                     const std::string& scenario);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rtd3
