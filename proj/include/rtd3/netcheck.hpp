#pragma once

#include <cstddef>

#include "rtd3/gradcheck.hpp"
#include "rtd3/network.hpp"

namespace rtd3 {

class Rng;

struct NetworkCheck {
  GradCheckResult params;
  GradCheckResult inputs;  // sequence and current-step inputs together
  double worst() const {
    return params.max_rel_error > inputs.max_rel_error
               ? params.max_rel_error
               : inputs.max_rel_error;
  }
};

// Random inputs shaped for `spec`. With `front_padding`, sample b has its
// first (b % steps) steps masked out. With `seeded`, a random initial LSTM
// state is attached.
NetInput random_input(const NetSpec& spec, std::size_t batch,
                      std::size_t steps, Rng& rng, bool front_padding,
                      bool seeded);

// Gradient check of the scalar loss sum_b w_b * net(in)_b, w fixed random
// weights, against central differences, over all parameters and all
// network inputs.
NetworkCheck check_network(Network& net, NetInput in, Rng& rng,
                           const GradCheckOptions& options = {});

}  // namespace rtd3
