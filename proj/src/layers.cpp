#include "rtd3/layers.hpp"

#include <algorithm>
#include <cmath>

#include "rtd3/error.hpp"
#include "rtd3/kernels.hpp"
#include "rtd3/rng.hpp"

namespace rtd3 {

std::size_t ParameterSet::add(std::string name, std::size_t rows,
                              std::size_t cols) {
  const std::size_t offset = values_.size();
  slots_.push_back({std::move(name), rows, cols, offset});
  values_.resize(offset + rows * cols, 0.0);
  return slots_.size() - 1;
}

ConstMatrixView ParameterSet::value(std::size_t slot) const {
  const auto& s = slots_.at(slot);
  return {values_.data() + s.offset, s.rows, s.cols};
}

MatrixView ParameterSet::value(std::size_t slot) {
  const auto& s = slots_.at(slot);
  return {values_.data() + s.offset, s.rows, s.cols};
}

MatrixView ParameterSet::slice(std::span<double> flat,
                               std::size_t slot) const {
  if (flat.size() != values_.size()) {
    throw ContractViolation("ParameterSet::slice: buffer size mismatch");
  }
  const auto& s = slots_.at(slot);
  return {flat.data() + s.offset, s.rows, s.cols};
}

void relu_inplace(Matrix& x) {
  for (double& v : x.values()) v = v > 0.0 ? v : 0.0;
}

void relu_backward(ConstMatrixView activated, Matrix& grad) {
  auto g = grad.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(activated.data[i] > 0.0)) g[i] = 0.0;
  }
}

void tanh_inplace(Matrix& x) {
  for (double& v : x.values()) v = std::tanh(v);
}

void tanh_backward(ConstMatrixView activated, Matrix& grad) {
  auto g = grad.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = activated.data[i];
    g[i] *= 1.0 - y * y;
  }
}

namespace {

void fill_uniform(MatrixView m, double bound, Rng& rng) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data[i] = rng.uniform(-bound, bound);
  }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Linear::Linear(ParameterSet& params, const std::string& name, std::size_t in,
               std::size_t out)
    : in_(in), out_(out) {
  weight_ = params.add(name + ".weight", out, in);
  bias_ = params.add(name + ".bias", 1, out);
}

void Linear::init(ParameterSet& params, Rng& rng) const {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
  fill_uniform(params.value(weight_), bound, rng);
  fill_uniform(params.value(bias_), bound, rng);
}

Matrix Linear::forward(const ParameterSet& params, ConstMatrixView x) const {
  const auto b = params.value(bias_);
  return affine(x, params.value(weight_), {b.data, b.size()});
}

void Linear::backward(const ParameterSet& params, std::span<double> grads,
                      ConstMatrixView x, ConstMatrixView dy,
                      Matrix* dx) const {
  if (dy.cols != out_ || x.cols != in_ || x.rows != dy.rows) {
    throw ContractViolation("Linear::backward: shape mismatch");
  }
  if (!grads.empty()) {
    auto dw = params.slice(grads, weight_);
    auto db = params.slice(grads, bias_);
    kernels::gemm_tn(dy.data, x.data, dw.data, out_, in_, dy.rows, true);
    kernels::add_column_sums(dy.data, db.data, dy.rows, out_);
  }
  if (dx != nullptr) {
    dx->assign_zero(dy.rows, in_);
    kernels::gemm_nn(dy.data, params.value(weight_).data, dx->data(), dy.rows,
                     in_, out_, false);
  }
}

Lstm::Lstm(ParameterSet& params, const std::string& name, std::size_t in,
           std::size_t hidden)
    : name_(name), in_(in), hidden_(hidden) {
  w_ih_ = params.add(name + ".w_ih", 4 * hidden, in);
  w_hh_ = params.add(name + ".w_hh", 4 * hidden, hidden);
  b_ih_ = params.add(name + ".b_ih", 1, 4 * hidden);
  b_hh_ = params.add(name + ".b_hh", 1, 4 * hidden);
}

void Lstm::init(ParameterSet& params, Rng& rng) const {
  fill_uniform(params.value(w_ih_), 1.0 / std::sqrt(static_cast<double>(in_)),
               rng);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_));
  fill_uniform(params.value(w_hh_), bound, rng);
  fill_uniform(params.value(b_ih_), bound, rng);
  fill_uniform(params.value(b_hh_), bound, rng);
}

LstmCache Lstm::forward(const ParameterSet& params, ConstMatrixView xs,
                        std::size_t steps, std::span<const std::uint8_t> mask,
                        const LstmState& init) const {
  if (steps == 0) {
    throw ContractViolation("lstm '" + name_ + "': empty sequence");
  }
  if (xs.cols != in_ || xs.rows % steps != 0) {
    throw ContractViolation("lstm '" + name_ + "': input is " +
                            std::to_string(xs.rows) + "x" +
                            std::to_string(xs.cols) + ", expected (steps*B)x" +
                            std::to_string(in_));
  }
  const std::size_t batch = xs.rows / steps;
  const std::size_t H = hidden_;
  if (init.h.rows() != batch || init.h.cols() != H || init.c.rows() != batch ||
      init.c.cols() != H) {
    throw ContractViolation("lstm '" + name_ + "': initial state shape");
  }
  if (!mask.empty() && mask.size() != xs.rows) {
    throw ContractViolation("lstm '" + name_ + "': mask length");
  }

  LstmCache cache;
  cache.steps = steps;
  cache.batch = batch;
  cache.init = init;
  cache.mask.assign(mask.begin(), mask.end());

  // Input contribution for all steps in one product, biases folded in.
  const auto b_ih = params.value(b_ih_);
  const auto b_hh = params.value(b_hh_);
  std::vector<double> bias(4 * H);
  for (std::size_t j = 0; j < 4 * H; ++j) bias[j] = b_ih.data[j] + b_hh.data[j];
  cache.gates = affine(xs, params.value(w_ih_), bias);
  cache.cell.assign_zero(steps * batch, H);
  cache.cell_tanh.assign_zero(steps * batch, H);
  cache.hidden.assign_zero(steps * batch, H);

  const auto w_hh = params.value(w_hh_);
  for (std::size_t t = 0; t < steps; ++t) {
    const double* h_prev =
        t == 0 ? init.h.data() : cache.hidden.data() + (t - 1) * batch * H;
    const double* c_prev =
        t == 0 ? init.c.data() : cache.cell.data() + (t - 1) * batch * H;
    double* z = cache.gates.data() + t * batch * 4 * H;
    kernels::gemm_nt(h_prev, w_hh.data, z, batch, 4 * H, H, true);

    double* c_t = cache.cell.data() + t * batch * H;
    double* tc_t = cache.cell_tanh.data() + t * batch * H;
    double* h_t = cache.hidden.data() + t * batch * H;
    for (std::size_t b = 0; b < batch; ++b) {
      double* zb = z + b * 4 * H;
      const double* hp = h_prev + b * H;
      const double* cp = c_prev + b * H;
      double* cb = c_t + b * H;
      double* tcb = tc_t + b * H;
      double* hb = h_t + b * H;
      const bool valid = mask.empty() || mask[t * batch + b] != 0;
      for (std::size_t j = 0; j < H; ++j) {
        zb[j] = sigmoid(zb[j]);
        zb[H + j] = sigmoid(zb[H + j]);
        zb[2 * H + j] = std::tanh(zb[2 * H + j]);
        zb[3 * H + j] = sigmoid(zb[3 * H + j]);
      }
      if (valid) {
        for (std::size_t j = 0; j < H; ++j) {
          cb[j] = zb[H + j] * cp[j] + zb[j] * zb[2 * H + j];
          tcb[j] = std::tanh(cb[j]);
          hb[j] = zb[3 * H + j] * tcb[j];
        }
      } else {
        std::copy(cp, cp + H, cb);
        std::copy(hp, hp + H, hb);
        for (std::size_t j = 0; j < H; ++j) tcb[j] = std::tanh(cb[j]);
      }
    }
    if (!all_finite({h_t, batch * H})) {
      throw NumericFault("lstm '" + name_ + "': non-finite output at step " +
                         std::to_string(t));
    }
  }

  const std::size_t last = (steps - 1) * batch * H;
  cache.final.h = Matrix(batch, H,
                         std::vector<double>(cache.hidden.data() + last,
                                             cache.hidden.data() + last +
                                                 batch * H));
  cache.final.c = Matrix(batch, H,
                         std::vector<double>(cache.cell.data() + last,
                                             cache.cell.data() + last +
                                                 batch * H));
  return cache;
}

LstmState Lstm::step(const ParameterSet& params, ConstMatrixView x,
                     const LstmState& state) const {
  return forward(params, x, 1, {}, state).final;
}

void Lstm::backward(const ParameterSet& params, std::span<double> grads,
                    const LstmCache& cache, ConstMatrixView xs,
                    ConstMatrixView dh_all, const LstmState* d_final,
                    Matrix* dx, LstmState* d_init) const {
  const std::size_t T = cache.steps;
  const std::size_t B = cache.batch;
  const std::size_t H = hidden_;
  if (xs.rows != T * B || xs.cols != in_) {
    throw ContractViolation("lstm '" + name_ + "': backward input shape");
  }
  if (dh_all.data != nullptr && (dh_all.rows != T * B || dh_all.cols != H)) {
    throw ContractViolation("lstm '" + name_ + "': backward gradient shape");
  }
  if (d_final != nullptr &&
      (d_final->h.rows() != B || d_final->h.cols() != H ||
       d_final->c.rows() != B || d_final->c.cols() != H)) {
    throw ContractViolation("lstm '" + name_ + "': final-state gradient shape");
  }

  Matrix dh_next = d_final != nullptr ? d_final->h : Matrix(B, H);
  Matrix dc_next = d_final != nullptr ? d_final->c : Matrix(B, H);
  Matrix dz_all(T * B, 4 * H);
  Matrix dh(B, H);
  const auto w_hh = params.value(w_hh_);

  for (std::size_t tt = T; tt-- > 0;) {
    const double* gates = cache.gates.data() + tt * B * 4 * H;
    const double* tc = cache.cell_tanh.data() + tt * B * H;
    const double* c_prev =
        tt == 0 ? cache.init.c.data() : cache.cell.data() + (tt - 1) * B * H;
    double* dz = dz_all.data() + tt * B * 4 * H;

    for (std::size_t i = 0; i < B * H; ++i) {
      dh.data()[i] = dh_next.data()[i];
    }
    if (dh_all.data != nullptr) {
      const double* up = dh_all.data + tt * B * H;
      for (std::size_t i = 0; i < B * H; ++i) dh.data()[i] += up[i];
    }

    for (std::size_t b = 0; b < B; ++b) {
      const bool valid = cache.mask.empty() || cache.mask[tt * B + b] != 0;
      double* dhb = dh.data() + b * H;
      double* dcb = dc_next.data() + b * H;
      if (!valid) {
        // Pass-through: dh, dc flow unchanged to the previous step; dz stays 0.
        continue;
      }
      const double* gb = gates + b * 4 * H;
      const double* tcb = tc + b * H;
      const double* cpb = c_prev + b * H;
      double* dzb = dz + b * 4 * H;
      for (std::size_t j = 0; j < H; ++j) {
        const double ig = gb[j];
        const double fg = gb[H + j];
        const double gg = gb[2 * H + j];
        const double og = gb[3 * H + j];
        const double d_o = dhb[j] * tcb[j];
        const double dc = dcb[j] + dhb[j] * og * (1.0 - tcb[j] * tcb[j]);
        dzb[j] = dc * gg * ig * (1.0 - ig);
        dzb[H + j] = dc * cpb[j] * fg * (1.0 - fg);
        dzb[2 * H + j] = dc * ig * (1.0 - gg * gg);
        dzb[3 * H + j] = d_o * og * (1.0 - og);
        dcb[j] = dc * fg;
      }
      // dh for this row is rebuilt from dz below.
      std::fill(dhb, dhb + H, 0.0);
    }
    // Valid rows: dh_prev = dz W_hh. Masked rows: dz is zero so the product
    // adds nothing and dh (kept intact above) passes through.
    kernels::gemm_nn(dz, w_hh.data, dh.data(), B, H, 4 * H, true);
    std::swap(dh_next, dh);
  }

  if (!grads.empty()) {
    // h_{t-1} for every step, time-major, to batch the recurrent gradient.
    Matrix h_prev(T * B, H);
    std::copy(cache.init.h.data(), cache.init.h.data() + B * H, h_prev.data());
    if (T > 1) {
      std::copy(cache.hidden.data(), cache.hidden.data() + (T - 1) * B * H,
                h_prev.data() + B * H);
    }
    kernels::gemm_tn(dz_all.data(), xs.data, params.slice(grads, w_ih_).data,
                     4 * H, in_, T * B, true);
    kernels::gemm_tn(dz_all.data(), h_prev.data(),
                     params.slice(grads, w_hh_).data, 4 * H, H, T * B, true);
    kernels::add_column_sums(dz_all.data(), params.slice(grads, b_ih_).data,
                             T * B, 4 * H);
    kernels::add_column_sums(dz_all.data(), params.slice(grads, b_hh_).data,
                             T * B, 4 * H);
  }
  if (dx != nullptr) {
    dx->assign_zero(T * B, in_);
    kernels::gemm_nn(dz_all.data(), params.value(w_ih_).data, dx->data(),
                     T * B, in_, 4 * H, false);
  }
  if (d_init != nullptr) {
    d_init->h = std::move(dh_next);
    d_init->c = std::move(dc_next);
  }
}

}  // namespace rtd3
