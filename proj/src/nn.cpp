// SPDX-License-Identifier: Apache-2.0
#include "hogfusion/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "hogfusion/error.hpp"

namespace hogfusion::nn {

namespace {

[[noreturn]] void shape_error(const std::string& what) { throw Error(ErrorCode::ShapeMismatch, what); }

template <typename T>
void require_finite(const BasicTensor<T>& x, const char* op) {
  for (T v : x.values())
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, std::string(op) + " received a non-finite value");
}

template <typename T>
void require_same_shape(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op) {
  if (a.shape() != b.shape())
    shape_error(std::string(op) + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
}

}  // namespace

// ---- dense -----------------------------------------------------------------

template <typename T>
BasicTensor<T> dense(const BasicTensor<T>& x, const BasicTensor<T>& W, const BasicTensor<T>& b) {
  if (x.rank() != 2 || W.rank() != 2 || b.rank() != 1 || x.dim(1) != W.dim(0) || b.dim(0) != W.dim(1))
    shape_error("dense: x " + shape_string(x.shape()) + ", W " + shape_string(W.shape()) + ", b " +
                shape_string(b.shape()));
  const std::size_t batch = x.dim(0), n = W.dim(0), m = W.dim(1);
  BasicTensor<T> out({batch, m});
  for (std::size_t i = 0; i < batch; ++i) {
    T* o = out.data() + i * m;
    std::copy(b.data(), b.data() + m, o);
    const T* xi = x.data() + i * n;
    for (std::size_t k = 0; k < n; ++k) {
      const T a = xi[k];
      if (a == T{0}) continue;
      const T* w = W.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) o[j] += a * w[j];
    }
  }
  return out;
}

template <typename T>
DenseGrads<T> dense_backward(const BasicTensor<T>& x, const BasicTensor<T>& W, const BasicTensor<T>& dout,
                             bool need_dx) {
  if (dout.rank() != 2 || dout.dim(0) != x.dim(0) || dout.dim(1) != W.dim(1))
    shape_error("dense_backward: dout " + shape_string(dout.shape()));
  const std::size_t batch = x.dim(0), n = W.dim(0), m = W.dim(1);
  DenseGrads<T> g{BasicTensor<T>(), BasicTensor<T>({n, m}), BasicTensor<T>({m})};
  for (std::size_t i = 0; i < batch; ++i) {
    const T* d = dout.data() + i * m;
    const T* xi = x.data() + i * n;
    for (std::size_t j = 0; j < m; ++j) g.db[j] += d[j];
    for (std::size_t k = 0; k < n; ++k) {
      const T a = xi[k];
      if (a == T{0}) continue;
      T* dw = g.dW.data() + k * m;
      for (std::size_t j = 0; j < m; ++j) dw[j] += a * d[j];
    }
  }
  if (need_dx) {
    g.dx = BasicTensor<T>({batch, n});
    for (std::size_t i = 0; i < batch; ++i) {
      const T* d = dout.data() + i * m;
      T* dx = g.dx.data() + i * n;
      for (std::size_t k = 0; k < n; ++k) {
        const T* w = W.data() + k * m;
        T acc{0};
        for (std::size_t j = 0; j < m; ++j) acc += w[j] * d[j];
        dx[k] = acc;
      }
    }
  }
  return g;
}

// ---- conv2d ----------------------------------------------------------------

template <typename T>
BasicTensor<T> conv2d(const BasicTensor<T>& x, const BasicTensor<T>& kernels, const BasicTensor<T>& bias) {
  if (x.rank() != 4 || kernels.rank() != 4 || kernels.dim(0) != 3 || kernels.dim(1) != 3 ||
      kernels.dim(2) != x.dim(3) || bias.rank() != 1 || bias.dim(0) != kernels.dim(3))
    shape_error("conv2d: x " + shape_string(x.shape()) + ", K " + shape_string(kernels.shape()) + ", b " +
                shape_string(bias.shape()));
  if (x.dim(1) < 3 || x.dim(2) < 3)
    throw Error(ErrorCode::InputTooSmall, "conv2d needs at least 3x3 spatial input, got " + shape_string(x.shape()));
  const std::size_t batch = x.dim(0), h = x.dim(1), w = x.dim(2), cin = x.dim(3), cout = kernels.dim(3);
  const std::size_t oh = h - 2, ow = w - 2;
  BasicTensor<T> out({batch, oh, ow, cout});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xo = 0; xo < ow; ++xo) {
        T* o = &out.at(b, y, xo, 0);
        std::copy(bias.data(), bias.data() + cout, o);
        for (std::size_t ky = 0; ky < 3; ++ky) {
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const T* in = &x.at(b, y + ky, xo + kx, 0);
            const T* k = kernels.data() + (ky * 3 + kx) * cin * cout;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const T a = in[ci];
              if (a == T{0}) continue;
              const T* kc = k + ci * cout;
              for (std::size_t co = 0; co < cout; ++co) o[co] += a * kc[co];
            }
          }
        }
      }
    }
  }
  return out;
}

template <typename T>
Conv2dGrads<T> conv2d_backward(const BasicTensor<T>& x, const BasicTensor<T>& kernels, const BasicTensor<T>& dout,
                               bool need_dx) {
  const std::size_t batch = x.dim(0), h = x.dim(1), w = x.dim(2), cin = x.dim(3), cout = kernels.dim(3);
  const std::size_t oh = h - 2, ow = w - 2;
  if (dout.shape() != Shape{batch, oh, ow, cout}) shape_error("conv2d_backward: dout " + shape_string(dout.shape()));
  Conv2dGrads<T> g{BasicTensor<T>(), BasicTensor<T>(kernels.shape()), BasicTensor<T>({cout})};
  if (need_dx) g.dx = BasicTensor<T>(x.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xo = 0; xo < ow; ++xo) {
        const T* d = &dout.at(b, y, xo, 0);
        for (std::size_t co = 0; co < cout; ++co) g.db[co] += d[co];
        for (std::size_t ky = 0; ky < 3; ++ky) {
          for (std::size_t kx = 0; kx < 3; ++kx) {
            const T* in = &x.at(b, y + ky, xo + kx, 0);
            const std::size_t koff = (ky * 3 + kx) * cin * cout;
            T* dk = g.dK.data() + koff;
            const T* k = kernels.data() + koff;
            T* dx = need_dx ? &g.dx.at(b, y + ky, xo + kx, 0) : nullptr;
            for (std::size_t ci = 0; ci < cin; ++ci) {
              const T a = in[ci];
              T* dkc = dk + ci * cout;
              const T* kc = k + ci * cout;
              T acc{0};
              for (std::size_t co = 0; co < cout; ++co) {
                dkc[co] += a * d[co];
                acc += kc[co] * d[co];
              }
              if (dx) dx[ci] += acc;
            }
          }
        }
      }
    }
  }
  return g;
}

// ---- maxpool ---------------------------------------------------------------

template <typename T>
PoolResult<T> maxpool2d(const BasicTensor<T>& x) {
  if (x.rank() != 4) shape_error("maxpool2d expects NHWC input, got " + shape_string(x.shape()));
  if (x.dim(1) < 2 || x.dim(2) < 2)
    throw Error(ErrorCode::InputTooSmall, "maxpool2d needs at least 2x2 spatial input, got " + shape_string(x.shape()));
  const std::size_t batch = x.dim(0), c = x.dim(3), oh = x.dim(1) / 2, ow = x.dim(2) / 2;
  PoolResult<T> r{BasicTensor<T>({batch, oh, ow, c}), {}};
  r.argmax.resize(r.out.size());
  std::size_t o = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xo = 0; xo < ow; ++xo) {
        for (std::size_t ch = 0; ch < c; ++ch, ++o) {
          std::size_t best = 0;
          T best_v = -std::numeric_limits<T>::infinity();
          for (std::size_t dy = 0; dy < 2; ++dy) {
            for (std::size_t dx = 0; dx < 2; ++dx) {
              const std::size_t idx = ((b * x.dim(1) + 2 * y + dy) * x.dim(2) + 2 * xo + dx) * c + ch;
              if (x[idx] > best_v || (dy == 0 && dx == 0)) {
                best_v = x[idx];
                best = idx;
              }
            }
          }
          r.out[o] = best_v;
          r.argmax[o] = best;
        }
      }
    }
  }
  return r;
}

template <typename T>
BasicTensor<T> maxpool2d_backward(const Shape& input_shape, std::span<const std::size_t> argmax,
                                  const BasicTensor<T>& dout) {
  if (argmax.size() != dout.size()) shape_error("maxpool2d_backward: argmax/dout length mismatch");
  BasicTensor<T> dx(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) dx[argmax[i]] += dout[i];
  return dx;
}

// ---- activations -----------------------------------------------------------

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  require_finite(x, "relu");
  BasicTensor<T> y = x;
  for (T& v : y.values()) v = std::max(v, T{0});
  return y;
}

template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& x, const BasicTensor<T>& dout) {
  require_same_shape(x, dout, "relu_backward");
  BasicTensor<T> dx = dout;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(x[i] > T{0})) dx[i] = T{0};
  return dx;
}

template <typename T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  require_finite(x, "sigmoid");
  BasicTensor<T> y = x;
  for (T& v : y.values()) {
    // Split on sign so exp never overflows.
    if (v >= T{0}) {
      v = T{1} / (T{1} + std::exp(-v));
    } else {
      const T e = std::exp(v);
      v = e / (T{1} + e);
    }
  }
  return y;
}

template <typename T>
BasicTensor<T> sigmoid_backward(const BasicTensor<T>& y, const BasicTensor<T>& dout) {
  require_same_shape(y, dout, "sigmoid_backward");
  BasicTensor<T> dx = dout;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= y[i] * (T{1} - y[i]);
  return dx;
}

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& x) {
  require_finite(x, "softmax");
  BasicTensor<T> y = x;
  const std::size_t c = x.shape().back();
  if (c == 0) return y;
  for (std::size_t r = 0; r < y.size() / c; ++r) {
    T* row = y.data() + r * c;
    const T mx = *std::max_element(row, row + c);
    T sum{0};
    for (std::size_t j = 0; j < c; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < c; ++j) row[j] /= sum;
  }
  return y;
}

template <typename T>
BasicTensor<T> softmax_backward(const BasicTensor<T>& y, const BasicTensor<T>& dout) {
  require_same_shape(y, dout, "softmax_backward");
  BasicTensor<T> dx(y.shape());
  const std::size_t c = y.shape().back();
  for (std::size_t r = 0; r < y.size() / c; ++r) {
    const T* yr = y.data() + r * c;
    const T* dr = dout.data() + r * c;
    T dot{0};
    for (std::size_t j = 0; j < c; ++j) dot += yr[j] * dr[j];
    for (std::size_t j = 0; j < c; ++j) dx[r * c + j] = yr[j] * (dr[j] - dot);
  }
  return dx;
}

template <typename T>
DropoutResult<T> dropout(const BasicTensor<T>& x, double rate, Mode mode, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw Error(ErrorCode::InvalidRate, "dropout rate must be in [0, 1)");
  if (mode == Mode::Infer || rate == 0.0) return {x, BasicTensor<T>()};
  DropoutResult<T> r{x, BasicTensor<T>(x.shape())};
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.mask[i] = rng.uniform() < rate ? T{0} : keep_scale;
    r.out[i] *= r.mask[i];
  }
  return r;
}

template <typename T>
BasicTensor<T> dropout_backward(const BasicTensor<T>& mask, const BasicTensor<T>& dout) {
  if (mask.empty()) return dout;
  require_same_shape(mask, dout, "dropout_backward");
  BasicTensor<T> dx = dout;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask[i];
  return dx;
}

// ---- losses ----------------------------------------------------------------

namespace {

template <typename T>
void check_loss_shapes(const BasicTensor<T>& probs, const BasicTensor<T>& targets, const char* op) {
  if (probs.rank() != 2 || probs.shape() != targets.shape())
    shape_error(std::string(op) + ": probs " + shape_string(probs.shape()) + ", targets " +
                shape_string(targets.shape()));
}

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

}  // namespace

template <typename T>
double cross_entropy(const BasicTensor<T>& probs, const BasicTensor<T>& targets) {
  check_loss_shapes(probs, targets, "cross_entropy");
  const std::size_t batch = probs.dim(0);
  if (batch == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (targets[i] != T{0}) total -= static_cast<double>(targets[i]) * std::log(clamp_prob(probs[i]));
  return total / static_cast<double>(batch);
}

template <typename T>
BasicTensor<T> cross_entropy_backward(const BasicTensor<T>& probs, const BasicTensor<T>& targets) {
  check_loss_shapes(probs, targets, "cross_entropy_backward");
  BasicTensor<T> d(probs.shape());
  const double inv_b = 1.0 / static_cast<double>(probs.dim(0));
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    if (p > kProbClamp && p < 1.0 - kProbClamp) d[i] = static_cast<T>(-targets[i] * inv_b / p);
  }
  return d;
}

template <typename T>
BasicTensor<T> softmax_cross_entropy_backward(const BasicTensor<T>& probs, const BasicTensor<T>& targets) {
  check_loss_shapes(probs, targets, "softmax_cross_entropy_backward");
  BasicTensor<T> d(probs.shape());
  const T inv_b = T{1} / static_cast<T>(probs.dim(0));
  for (std::size_t i = 0; i < probs.size(); ++i) d[i] = (probs[i] - targets[i]) * inv_b;
  return d;
}

template <typename T>
double binary_cross_entropy(const BasicTensor<T>& probs, const BasicTensor<T>& targets) {
  check_loss_shapes(probs, targets, "binary_cross_entropy");
  if (probs.dim(1) != 1) shape_error("binary_cross_entropy expects B x 1");
  if (probs.dim(0) == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = clamp_prob(probs[i]);
    const double y = targets[i];
    total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
  }
  return total / static_cast<double>(probs.dim(0));
}

template <typename T>
BasicTensor<T> sigmoid_cross_entropy_backward(const BasicTensor<T>& probs, const BasicTensor<T>& targets) {
  check_loss_shapes(probs, targets, "sigmoid_cross_entropy_backward");
  return softmax_cross_entropy_backward(probs, targets);
}

BasicTensor<float> one_hot(std::span<const int> labels, std::size_t classes) {
  BasicTensor<float> t({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= classes)
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(labels[i]) + " outside [0, " +
                                                  std::to_string(classes) + ")");
    t.at(i, static_cast<std::size_t>(labels[i])) = 1.0f;
  }
  return t;
}

// ---- parameters ------------------------------------------------------------

template <typename T>
void BasicParameters<T>::add(const std::string& name, BasicTensor<T> value) {
  ParamSlot<T> s;
  s.m = BasicTensor<T>(value.shape());
  s.v = BasicTensor<T>(value.shape());
  s.value = std::move(value);
  slots_[name] = std::move(s);
}

template <typename T>
ParamSlot<T>& BasicParameters<T>::slot(const std::string& name) {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw Error(ErrorCode::UnknownParameter, name);
  return it->second;
}

template <typename T>
const ParamSlot<T>& BasicParameters<T>::slot(const std::string& name) const {
  auto it = slots_.find(name);
  if (it == slots_.end()) throw Error(ErrorCode::UnknownParameter, name);
  return it->second;
}

template <typename T>
const BasicTensor<T>& BasicParameters<T>::get(const std::string& name) const {
  return slot(name).value;
}

template <typename T>
BasicTensor<T>& BasicParameters<T>::get(const std::string& name) {
  return slot(name).value;
}

template <typename T>
std::vector<std::string> BasicParameters<T>::names() const {
  std::vector<std::string> out;
  out.reserve(slots_.size());
  for (const auto& kv : slots_) out.push_back(kv.first);
  return out;
}

template <typename T>
std::size_t BasicParameters<T>::total_values() const {
  std::size_t n = 0;
  for (const auto& kv : slots_) n += kv.second.value.size();
  return n;
}

template <typename T>
std::uint64_t BasicParameters<T>::hash(const std::function<bool(const std::string&)>& filter) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [name, s] : slots_) {
    if (filter && !filter(name)) continue;
    feed(name.data(), name.size());
    for (std::size_t d : s.value.shape()) feed(&d, sizeof d);
    feed(s.value.data(), s.value.size() * sizeof(T));
  }
  return h;
}

template <typename T>
void BasicParameters<T>::assign_values(const BasicParameters& other) {
  for (const auto& [name, s] : other.slots_) {
    auto& mine = slot(name);
    if (mine.value.shape() != s.value.shape()) shape_error("assign_values: shape mismatch for " + name);
    mine.value = s.value;
  }
}

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0))
    throw Error(ErrorCode::InvalidParams, "optimizer configuration out of range");
}

template <typename T>
void adam_step(BasicParameters<T>& params, const Gradients<T>& grads, const OptimConfig& cfg) {
  cfg.validate();
  // Validate everything first so a bad entry leaves the store untouched.
  for (const auto& [name, g] : grads) {
    const auto& s = params.slot(name);
    if (s.value.shape() != g.shape())
      shape_error("adam_step: gradient for " + name + " is " + shape_string(g.shape()) + ", parameter is " +
                  shape_string(s.value.shape()));
  }
  for (const auto& [name, g] : grads) {
    auto& s = params.slot(name);
    ++s.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(s.step));
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double gi = g[i];
      const double m = cfg.beta1 * s.m[i] + (1.0 - cfg.beta1) * gi;
      const double v = cfg.beta2 * s.v[i] + (1.0 - cfg.beta2) * gi * gi;
      s.m[i] = static_cast<T>(m);
      s.v[i] = static_cast<T>(v);
      const double m_hat = m / c1;
      const double v_hat = v / c2;
      s.value[i] = static_cast<T>(s.value[i] - cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.eps));
    }
  }
}

// ---- gradient check --------------------------------------------------------

template <typename T>
GradCheckReport grad_check(std::span<T> x, std::span<const T> analytic, const std::function<double()>& objective,
                           const GradCheckOptions& opts) {
  if (x.size() != analytic.size()) shape_error("grad_check: analytic gradient length differs from input");
  std::vector<std::size_t> coords(x.size());
  for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
  if (opts.max_coords != 0 && opts.max_coords < coords.size()) {
    Rng rng(opts.seed);
    rng.shuffle(std::span<std::size_t>(coords));
    coords.resize(opts.max_coords);
    std::sort(coords.begin(), coords.end());
  }
  GradCheckReport report;
  for (std::size_t i : coords) {
    const T saved = x[i];
    x[i] = static_cast<T>(saved + opts.epsilon);
    const double up = objective();
    x[i] = static_cast<T>(saved - opts.epsilon);
    const double down = objective();
    x[i] = saved;
    const double numeric = (up - down) / (2.0 * opts.epsilon);
    const double a = analytic[i];
    const double denom = std::max({std::abs(a), std::abs(numeric), opts.abs_floor});
    const double rel = std::abs(a - numeric) / denom;
    ++report.coords_checked;
    if (report.coords_checked == 1 || rel > report.max_rel_error) {
      report.max_rel_error = rel;
      report.worst_index = i;
      report.worst_analytic = a;
      report.worst_numeric = numeric;
    }
  }
  return report;
}

void merge(GradCheckReport& into, const GradCheckReport& other) {
  if (other.coords_checked == 0) return;
  if (into.coords_checked == 0 || other.max_rel_error > into.max_rel_error) {
    into.max_rel_error = other.max_rel_error;
    into.worst_index = other.worst_index;
    into.worst_analytic = other.worst_analytic;
    into.worst_numeric = other.worst_numeric;
  }
  into.coords_checked += other.coords_checked;
}

#define HOGFUSION_INSTANTIATE(T)                                                                                \
  template BasicTensor<T> dense(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);          \
  template DenseGrads<T> dense_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,    \
                                        bool);                                                                  \
  template BasicTensor<T> conv2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);         \
  template Conv2dGrads<T> conv2d_backward(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,  \
                                          bool);                                                                \
  template PoolResult<T> maxpool2d(const BasicTensor<T>&);                                                      \
  template BasicTensor<T> maxpool2d_backward(const Shape&, std::span<const std::size_t>, const BasicTensor<T>&); \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                                          \
  template BasicTensor<T> relu_backward(const BasicTensor<T>&, const BasicTensor<T>&);                          \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                                       \
  template BasicTensor<T> sigmoid_backward(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template BasicTensor<T> softmax(const BasicTensor<T>&);                                                       \
  template BasicTensor<T> softmax_backward(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template DropoutResult<T> dropout(const BasicTensor<T>&, double, Mode, Rng&);                                 \
  template BasicTensor<T> dropout_backward(const BasicTensor<T>&, const BasicTensor<T>&);                       \
  template double cross_entropy(const BasicTensor<T>&, const BasicTensor<T>&);                                  \
  template BasicTensor<T> cross_entropy_backward(const BasicTensor<T>&, const BasicTensor<T>&);                 \
  template BasicTensor<T> softmax_cross_entropy_backward(const BasicTensor<T>&, const BasicTensor<T>&);         \
  template double binary_cross_entropy(const BasicTensor<T>&, const BasicTensor<T>&);                           \
  template BasicTensor<T> sigmoid_cross_entropy_backward(const BasicTensor<T>&, const BasicTensor<T>&);         \
  template class BasicParameters<T>;                                                                            \
  template void adam_step(BasicParameters<T>&, const Gradients<T>&, const OptimConfig&);                       \
  template GradCheckReport grad_check(std::span<T>, std::span<const T>, const std::function<double()>&,         \
                                      const GradCheckOptions&);

HOGFUSION_INSTANTIATE(float)
HOGFUSION_INSTANTIATE(double)

#undef HOGFUSION_INSTANTIATE

}  // namespace hogfusion::nn
