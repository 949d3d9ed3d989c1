#include "rtd3/checkpoint.hpp"

#include <cstring>
#include <utility>
#include <vector>

#include "binary_io.hpp"
#include "rtd3/error.hpp"

namespace rtd3 {

namespace {

constexpr char kMagic[8] = {'R', 'T', 'D', '3', 'C', 'K', 'P', 'T'};
constexpr std::uint8_t kVersion = 1;

template <typename AgentT>
auto roles(AgentT& a) {
  return std::vector<std::pair<const char*, decltype(&a.actor())>>{
      {"actor", &a.actor()},
      {"target_actor", &a.target_actor()},
      {"critic1", &a.critic(0)},
      {"critic2", &a.critic(1)},
      {"target_critic1", &a.target_critic(0)},
      {"target_critic2", &a.target_critic(1)},
  };
}

}  // namespace

void save_checkpoint(const std::string& path, const Agent& agent,
                     const std::string& scenario) {
  detail::Writer w(path);
  w.bytes(kMagic, sizeof kMagic);
  w.u8(kVersion);
  const VariantSpec& v = agent.variant();
  w.str(v.name());
  w.u64(v.history);
  w.u64(v.obs_dim);
  w.u64(v.act_dim);
  w.u64(v.hidden);
  w.f64(agent.hyper().max_action);
  w.str(scenario);
  const auto nets = roles(agent);
  w.u64(nets.size());
  for (const auto& [role, net] : nets) {
    w.str(role);
    const ParameterSet& ps = net->params();
    w.u64(ps.slots().size());
    for (std::size_t s = 0; s < ps.slots().size(); ++s) {
      const ParameterSlot& slot = ps.slots()[s];
      w.str(slot.name);
      w.u64(slot.rows);
      w.u64(slot.cols);
      const ConstMatrixView m = ps.value(s);
      for (std::size_t i = 0; i < m.size(); ++i) w.f64(m.data[i]);
    }
  }
  w.finish();
}

Checkpoint load_checkpoint(const std::string& path) {
  detail::Reader r(path);
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw IoError("'" + path + "' is not a model checkpoint");
  }
  const auto version = r.u8();
  if (version != kVersion) {
    throw IoError("checkpoint version " + std::to_string(version) +
                  " unsupported");
  }
  VariantSpec v = VariantSpec::parse(r.str());
  v.history = r.u64();
  v.obs_dim = r.u64();
  v.act_dim = r.u64();
  v.hidden = r.u64();
  Hyperparams hyper;
  hyper.max_action = r.f64();
  std::string scenario = r.str();
  Checkpoint ck{std::move(scenario), Agent(v, hyper, 0)};

  auto nets = roles(ck.agent);
  if (r.u64() != nets.size()) throw IoError("checkpoint: network count");
  for (auto& [role, net] : nets) {
    if (r.str() != role) {
      throw IoError(std::string("checkpoint: expected network ") + role);
    }
    ParameterSet& ps = net->params();
    if (r.u64() != ps.slots().size()) {
      throw ConfigError(std::string("checkpoint: layer count of ") + role +
                        " does not match the variant");
    }
    for (std::size_t s = 0; s < ps.slots().size(); ++s) {
      const ParameterSlot& slot = ps.slots()[s];
      const std::string name = r.str();
      const auto rows = r.u64();
      const auto cols = r.u64();
      if (name != slot.name || rows != slot.rows || cols != slot.cols) {
        throw ConfigError("checkpoint: layer " + name + " (" +
                          std::to_string(rows) + "x" + std::to_string(cols) +
                          ") does not match " + slot.name);
      }
      MatrixView m = ps.value(s);
      for (std::size_t i = 0; i < m.size(); ++i) m.data[i] = r.f64();
    }
  }
  return ck;
}

}  // namespace rtd3
