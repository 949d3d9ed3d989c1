#include "rtd3/network.hpp"

#include <algorithm>
#include <cmath>

#include "rtd3/error.hpp"
#include "rtd3/rng.hpp"

namespace rtd3 {

std::size_t NetSpec::param_count() const {
  std::size_t n = 0;
  if (seq_in > 0) {
    n += Linear::param_count(seq_in, hidden) + Lstm::param_count(hidden, hidden);
  }
  if (ff_in > 0) n += Linear::param_count(ff_in, hidden);
  n += Linear::param_count(channels() * hidden, hidden);
  n += Linear::param_count(hidden, 1);
  return n;
}

std::size_t NetInput::batch() const {
  if (steps > 0) return seq.rows() / steps;
  return ff.rows();
}

Network::Network(const NetSpec& spec) : spec_(spec) {
  if (spec.channels() == 0 || spec.hidden == 0) {
    throw ConfigError("network needs at least one input channel and width");
  }
  const std::size_t H = spec.hidden;
  if (spec.seq_in > 0) {
    seq_lin_ = Linear(params_, "seq_in", spec.seq_in, H);
    lstm_ = Lstm(params_, "lstm", H, H);
  }
  if (spec.ff_in > 0) ff_lin_ = Linear(params_, "ff_in", spec.ff_in, H);
  trunk_lin_ = Linear(params_, "trunk", spec.channels() * H, H);
  out_lin_ = Linear(params_, "out", H, 1);
}

Network::Network(const NetSpec& spec, Rng& init_rng) : Network(spec) {
  init(init_rng);
}

void Network::init(Rng& rng) {
  if (spec_.seq_in > 0) {
    seq_lin_.init(params_, rng);
    lstm_.init(params_, rng);
  }
  if (spec_.ff_in > 0) ff_lin_.init(params_, rng);
  trunk_lin_.init(params_, rng);
  out_lin_.init(params_, rng);
}

namespace {

void check_input(const NetSpec& spec, const NetInput& in) {
  if (spec.seq_in > 0) {
    if (in.steps == 0 || in.seq.cols() != spec.seq_in ||
        in.seq.rows() % in.steps != 0) {
      throw ContractViolation("network: sequence input has " +
                              std::to_string(in.seq.cols()) +
                              " features, expected " +
                              std::to_string(spec.seq_in));
    }
  }
  if (spec.ff_in > 0) {
    if (in.ff.cols() != spec.ff_in) {
      throw ContractViolation("network: current-step input has " +
                              std::to_string(in.ff.cols()) +
                              " features, expected " +
                              std::to_string(spec.ff_in));
    }
    if (spec.seq_in > 0 && in.ff.rows() != in.seq.rows() / in.steps) {
      throw ContractViolation("network: channel batch sizes differ");
    }
  }
  // ReLU would silently map NaN to zero, so reject bad inputs up front.
  if (!all_finite(in.seq.values()) || !all_finite(in.ff.values()) ||
      (in.init && (!all_finite(in.init->h.values()) ||
                   !all_finite(in.init->c.values())))) {
    throw NumericFault("network: non-finite input");
  }
}

}  // namespace

LstmState Network::encode(const NetInput& in) const {
  if (spec_.seq_in == 0) {
    throw ContractViolation("network: encode() needs a sequence channel");
  }
  check_input(spec_, in);
  Matrix act = seq_lin_.forward(params_, in.seq);
  relu_inplace(act);
  const std::size_t batch = in.seq.rows() / in.steps;
  const LstmState zero = LstmState::zeros(batch, spec_.hidden);
  return lstm_
      .forward(params_, act, in.steps, in.mask, in.init ? *in.init : zero)
      .final;
}

Matrix Network::forward(const NetInput& in, NetCache* cache) const {
  check_input(spec_, in);
  NetCache local;
  NetCache& c = cache != nullptr ? *cache : local;
  const std::size_t H = spec_.hidden;

  Matrix seq_h;
  if (spec_.seq_in > 0) {
    c.seq_act = seq_lin_.forward(params_, in.seq);
    relu_inplace(c.seq_act);
    const std::size_t batch = in.seq.rows() / in.steps;
    const LstmState zero = LstmState::zeros(batch, H);
    c.lstm = lstm_.forward(params_, c.seq_act, in.steps, in.mask,
                           in.init ? *in.init : zero);
    seq_h = c.lstm.final.h;
  }
  if (spec_.ff_in > 0) {
    c.ff_act = ff_lin_.forward(params_, in.ff);
    relu_inplace(c.ff_act);
  }
  if (spec_.seq_in > 0 && spec_.ff_in > 0) {
    c.joined = hconcat(seq_h, c.ff_act);
  } else if (spec_.seq_in > 0) {
    c.joined = std::move(seq_h);
  } else {
    c.joined = c.ff_act;
  }
  c.trunk_act = trunk_lin_.forward(params_, c.joined);
  relu_inplace(c.trunk_act);
  c.out = out_lin_.forward(params_, c.trunk_act);
  if (spec_.tanh_output) {
    tanh_inplace(c.out);
    c.out_tanh = c.out;
    if (spec_.output_scale != 1.0) {
      for (double& v : c.out.values()) v *= spec_.output_scale;
    }
  }
  if (!all_finite(c.out.values())) {
    throw NumericFault("network: non-finite output");
  }
  return c.out;
}

void Network::backward(const NetInput& in, const NetCache& cache,
                       ConstMatrixView d_out, std::span<double> grads,
                       NetInputGrad* d_in) const {
  const std::size_t H = spec_.hidden;
  const std::size_t B = cache.out.rows();
  if (d_out.rows != B || d_out.cols != 1) {
    throw ContractViolation("network: output gradient shape");
  }
  if (!grads.empty() && grads.size() != params_.size()) {
    throw ContractViolation("network: gradient buffer size");
  }

  Matrix d_pre(B, 1, std::vector<double>(d_out.data, d_out.data + B));
  if (spec_.tanh_output) {
    for (double& v : d_pre.values()) v *= spec_.output_scale;
    tanh_backward(cache.out_tanh, d_pre);
  }
  Matrix d_trunk;
  out_lin_.backward(params_, grads, cache.trunk_act, d_pre, &d_trunk);
  relu_backward(cache.trunk_act, d_trunk);
  Matrix d_joined;
  trunk_lin_.backward(params_, grads, cache.joined, d_trunk, &d_joined);

  Matrix d_seq_h;
  Matrix d_ff;
  if (spec_.seq_in > 0 && spec_.ff_in > 0) {
    d_seq_h.assign_zero(B, H);
    d_ff.assign_zero(B, H);
    for (std::size_t r = 0; r < B; ++r) {
      const auto row = d_joined.row(r);
      std::copy(row.begin(), row.begin() + H, d_seq_h.row(r).begin());
      std::copy(row.begin() + H, row.end(), d_ff.row(r).begin());
    }
  } else if (spec_.seq_in > 0) {
    d_seq_h = std::move(d_joined);
  } else {
    d_ff = std::move(d_joined);
  }

  if (spec_.ff_in > 0) {
    relu_backward(cache.ff_act, d_ff);
    ff_lin_.backward(params_, grads, in.ff, d_ff,
                     d_in != nullptr ? &d_in->ff : nullptr);
  }
  if (spec_.seq_in > 0) {
    // Only the final hidden state feeds the trunk.
    LstmState d_final{std::move(d_seq_h), Matrix(B, H)};
    Matrix d_seq_act;
    lstm_.backward(params_, grads, cache.lstm, cache.seq_act, {}, &d_final,
                   &d_seq_act, nullptr);
    relu_backward(cache.seq_act, d_seq_act);
    seq_lin_.backward(params_, grads, in.seq, d_seq_act,
                      d_in != nullptr ? &d_in->seq : nullptr);
  }
}

}  // namespace rtd3
