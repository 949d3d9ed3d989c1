#include "rtd3/netcheck.hpp"

#include <algorithm>

#include "rtd3/rng.hpp"

namespace rtd3 {

NetInput random_input(const NetSpec& spec, std::size_t batch,
                      std::size_t steps, Rng& rng, bool front_padding,
                      bool seeded) {
  NetInput in;
  if (spec.seq_in > 0) {
    in.steps = steps;
    in.seq = Matrix(steps * batch, spec.seq_in);
    for (double& v : in.seq.values()) v = rng.uniform(-1.0, 1.0);
    if (front_padding) {
      in.mask.assign(steps * batch, 1);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t t = 0; t < b % steps; ++t) {
          in.mask[t * batch + b] = 0;
          std::fill(in.seq.row(t * batch + b).begin(),
                    in.seq.row(t * batch + b).end(), 0.0);
        }
      }
    }
    if (seeded) {
      LstmState s = LstmState::zeros(batch, spec.hidden);
      for (double& v : s.h.values()) v = rng.uniform(-0.5, 0.5);
      for (double& v : s.c.values()) v = rng.uniform(-0.5, 0.5);
      in.init = std::move(s);
    }
  }
  if (spec.ff_in > 0) {
    in.ff = Matrix(batch, spec.ff_in);
    for (double& v : in.ff.values()) v = rng.uniform(-1.0, 1.0);
  }
  return in;
}

NetworkCheck check_network(Network& net, NetInput in, Rng& rng,
                           const GradCheckOptions& options) {
  const std::size_t batch = in.batch();
  Matrix w(batch, 1);
  for (double& v : w.values()) v = rng.uniform(-1.0, 1.0);
  auto loss = [&] {
    const Matrix out = net.forward(in);
    double total = 0.0;
    for (std::size_t b = 0; b < batch; ++b) total += w(b, 0) * out(b, 0);
    return total;
  };

  NetCache cache;
  net.forward(in, &cache);
  std::vector<double> grads = net.params().zeros_like();
  NetInputGrad d_in;
  net.backward(in, cache, w, grads, &d_in);

  NetworkCheck r;
  r.params = grad_check(net.params().values(), grads, loss, options);

  // Inputs: the sequence block followed by the current-step block.
  std::vector<double> analytic;
  std::vector<double> values;
  const auto append = [&](const Matrix& x, const Matrix& g) {
    values.insert(values.end(), x.values().begin(), x.values().end());
    analytic.insert(analytic.end(), g.values().begin(), g.values().end());
  };
  if (!in.seq.empty()) append(in.seq, d_in.seq);
  if (!in.ff.empty()) append(in.ff, d_in.ff);
  const std::size_t seq_size = in.seq.size();
  auto input_loss = [&] {
    std::copy_n(values.begin(), seq_size, in.seq.data());
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(seq_size),
              values.end(), in.ff.data());
    return loss();
  };
  r.inputs = grad_check(values, analytic, input_loss, options);
  return r;
}

}  // namespace rtd3
