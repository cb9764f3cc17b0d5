// Copyright 2026 The dogvc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dogvc/nets/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace dogvc::nets {

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw Error(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
}

double sigm(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

Tensor scalar_tensor(double v) { return Tensor(1, 1, 1, v); }

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same(a->value, b->value, "add");
  Tensor out = a->value;
  out.add(b->value);
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) a->grad_buffer().add(self.grad);
    if (b->requires_grad) b->grad_buffer().add(self.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require_same(a->value, b->value, "sub");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b->value[i];
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) a->grad_buffer().add(self.grad);
    if (b->requires_grad) {
      auto& g = b->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same(a->value, b->value, "mul");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b->value[i];
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    if (a->requires_grad) {
      auto& g = a->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * b->value[i];
    }
    if (b->requires_grad) {
      auto& g = b->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * a->value[i];
    }
  });
}

Var scale(const Var& a, double s) {
  Tensor out = a->value;
  for (auto& v : out.data()) v *= s;
  return make_node(std::move(out), {a}, [a, s](Node& self) {
    auto& g = a->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * self.grad[i];
  });
}

Var sigmoid(const Var& a) {
  Tensor out = a->value;
  for (auto& v : out.data()) v = sigm(v);
  return make_node(std::move(out), {a}, [a](Node& self) {
    auto& g = a->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = self.value[i];
      g[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

Var exp(const Var& a) {
  Tensor out = a->value;
  for (auto& v : out.data()) v = std::exp(v);
  return make_node(std::move(out), {a}, [a](Node& self) {
    auto& g = a->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * self.value[i];
  });
}

Var weighted_sum(const std::vector<Var>& terms, const std::vector<double>& weights) {
  if (terms.size() != weights.size()) throw Error("weighted_sum: terms and weights differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) total += weights[i] * scalar(terms[i]);
  return make_node(scalar_tensor(total), terms, [terms, weights](Node& self) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (terms[i]->requires_grad) terms[i]->grad_buffer()[0] += weights[i] * self.grad[0];
    }
  });
}

Var glu(const Var& a, const Var& b) {
  require_same(a->value, b->value, "glu");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sigm(b->value[i]);
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      const double s = sigm(b->value[i]);
      if (a->requires_grad) a->grad_buffer()[i] += self.grad[i] * s;
      if (b->requires_grad) b->grad_buffer()[i] += self.grad[i] * a->value[i] * s * (1.0 - s);
    }
  });
}

Var slice_channels(const Var& x, int begin, int count) {
  const Tensor& v = x->value;
  if (begin < 0 || count <= 0 || begin + count > v.c()) throw Error("slice_channels: range out of bounds");
  Tensor out(v.n(), count, v.t());
  for (int n = 0; n < v.n(); ++n) {
    for (int c = 0; c < count; ++c) std::copy_n(v.row(n, begin + c), v.t(), out.row(n, c));
  }
  return make_node(std::move(out), {x}, [x, begin, count](Node& self) {
    auto& g = x->grad_buffer();
    for (int n = 0; n < g.n(); ++n) {
      for (int c = 0; c < count; ++c) {
        double* dst = g.row(n, begin + c);
        const double* src = self.grad.row(n, c);
        for (int t = 0; t < g.t(); ++t) dst[t] += src[t];
      }
    }
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Tensor &va = a->value, &vb = b->value;
  if (va.n() != vb.n() || va.t() != vb.t()) throw Error("concat_channels: batch/time mismatch");
  Tensor out(va.n(), va.c() + vb.c(), va.t());
  for (int n = 0; n < va.n(); ++n) {
    for (int c = 0; c < va.c(); ++c) std::copy_n(va.row(n, c), va.t(), out.row(n, c));
    for (int c = 0; c < vb.c(); ++c) std::copy_n(vb.row(n, c), vb.t(), out.row(n, va.c() + c));
  }
  return make_node(std::move(out), {a, b}, [a, b](Node& self) {
    const int ca = a->value.c();
    for (const auto& [src, offset] : {std::pair{a, 0}, std::pair{b, ca}}) {
      if (!src->requires_grad) continue;
      auto& g = src->grad_buffer();
      for (int n = 0; n < g.n(); ++n) {
        for (int c = 0; c < g.c(); ++c) {
          double* dst = g.row(n, c);
          const double* s = self.grad.row(n, offset + c);
          for (int t = 0; t < g.t(); ++t) dst[t] += s[t];
        }
      }
    }
  });
}

Var condition_concat(const Var& x, const Tensor& onehot) {
  const Tensor& v = x->value;
  if (onehot.n() != v.n() || onehot.t() != 1) {
    throw Error("condition_concat: expected N x D x 1 labels for batch " + std::to_string(v.n()));
  }
  Tensor planes(v.n(), onehot.c(), v.t());
  for (int n = 0; n < v.n(); ++n) {
    for (int d = 0; d < onehot.c(); ++d) std::fill_n(planes.row(n, d), v.t(), onehot(n, d, 0));
  }
  return concat_channels(x, constant(std::move(planes)));
}

Var pad_time(const Var& x, int left, int right) {
  if (left < 0 || right < 0) throw Error("pad_time: negative padding");
  if (left == 0 && right == 0) return x;
  const Tensor& v = x->value;
  Tensor out(v.n(), v.c(), v.t() + left + right);
  for (int n = 0; n < v.n(); ++n) {
    for (int c = 0; c < v.c(); ++c) std::copy_n(v.row(n, c), v.t(), out.row(n, c) + left);
  }
  return make_node(std::move(out), {x}, [x, left](Node& self) {
    auto& g = x->grad_buffer();
    for (int n = 0; n < g.n(); ++n) {
      for (int c = 0; c < g.c(); ++c) {
        const double* s = self.grad.row(n, c) + left;
        double* d = g.row(n, c);
        for (int t = 0; t < g.t(); ++t) d[t] += s[t];
      }
    }
  });
}

Var crop_time(const Var& x, int begin, int length) {
  const Tensor& v = x->value;
  if (begin < 0 || length <= 0 || begin + length > v.t()) throw Error("crop_time: range out of bounds");
  if (begin == 0 && length == v.t()) return x;
  Tensor out(v.n(), v.c(), length);
  for (int n = 0; n < v.n(); ++n) {
    for (int c = 0; c < v.c(); ++c) std::copy_n(v.row(n, c) + begin, length, out.row(n, c));
  }
  return make_node(std::move(out), {x}, [x, begin, length](Node& self) {
    auto& g = x->grad_buffer();
    for (int n = 0; n < g.n(); ++n) {
      for (int c = 0; c < g.c(); ++c) {
        const double* s = self.grad.row(n, c);
        double* d = g.row(n, c) + begin;
        for (int t = 0; t < length; ++t) d[t] += s[t];
      }
    }
  });
}

Var mean_time(const Var& x) {
  const Tensor& v = x->value;
  Tensor out(v.n(), v.c(), 1);
  for (int n = 0; n < v.n(); ++n) {
    for (int c = 0; c < v.c(); ++c) {
      double acc = 0.0;
      const double* r = v.row(n, c);
      for (int t = 0; t < v.t(); ++t) acc += r[t];
      out(n, c, 0) = acc / v.t();
    }
  }
  return make_node(std::move(out), {x}, [x](Node& self) {
    auto& g = x->grad_buffer();
    const double inv = 1.0 / g.t();
    for (int n = 0; n < g.n(); ++n) {
      for (int c = 0; c < g.c(); ++c) {
        const double s = self.grad(n, c, 0) * inv;
        double* d = g.row(n, c);
        for (int t = 0; t < g.t(); ++t) d[t] += s;
      }
    }
  });
}

Var conv1d(const Var& x, const Var& weight, const Var& bias, int stride, int pad_left, int pad_right) {
  const Tensor &xv = x->value, &wv = weight->value;
  const int batch = xv.n(), cin = xv.c(), tin = xv.t();
  const int cout = wv.n(), k = wv.t();
  if (wv.c() != cin) {
    throw Error("conv1d: input has " + std::to_string(cin) + " channels, weights expect " + std::to_string(wv.c()));
  }
  if (bias->value.c() != cout) throw Error("conv1d: bias size mismatch");
  if (stride < 1) throw Error("conv1d: stride must be >= 1");
  const int padded = tin + pad_left + pad_right;
  if (k > padded) {
    throw Error("conv1d: kernel " + std::to_string(k) + " exceeds padded input length " + std::to_string(padded));
  }
  const int tout = (padded - k) / stride + 1;

  // Output positions whose input index t*stride + j - pad_left lies in [0, tin).
  auto range = [=](int j) {
    const int off = j - pad_left;
    int lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
    int hi = (tin - 1 - off) >= 0 ? std::min(tout - 1, (tin - 1 - off) / stride) : -1;
    return std::pair{lo, hi};
  };

  Tensor out(batch, cout, tout);
  for (int n = 0; n < batch; ++n) {
    for (int co = 0; co < cout; ++co) {
      double* y = out.row(n, co);
      std::fill_n(y, tout, bias->value(0, co, 0));
      for (int ci = 0; ci < cin; ++ci) {
        const double* xr = xv.row(n, ci);
        const double* w = wv.row(co, ci);
        for (int j = 0; j < k; ++j) {
          const auto [lo, hi] = range(j);
          const double wj = w[j];
          const int off = j - pad_left;
          for (int t = lo; t <= hi; ++t) y[t] += wj * xr[t * stride + off];
        }
      }
    }
  }
  return make_node(std::move(out), {x, weight, bias}, [=](Node& self) {
    const Tensor& gy = self.grad;
    Tensor* gx = x->requires_grad ? &x->grad_buffer() : nullptr;
    Tensor* gw = weight->requires_grad ? &weight->grad_buffer() : nullptr;
    Tensor* gb = bias->requires_grad ? &bias->grad_buffer() : nullptr;
    const Tensor& xval = x->value;
    const Tensor& wval = weight->value;
    for (int n = 0; n < batch; ++n) {
      for (int co = 0; co < cout; ++co) {
        const double* g = gy.row(n, co);
        if (gb) {
          double acc = 0.0;
          for (int t = 0; t < tout; ++t) acc += g[t];
          (*gb)(0, co, 0) += acc;
        }
        for (int ci = 0; ci < cin; ++ci) {
          const double* xr = xval.row(n, ci);
          const double* w = wval.row(co, ci);
          double* gxr = gx ? gx->row(n, ci) : nullptr;
          double* gwr = gw ? gw->row(co, ci) : nullptr;
          for (int j = 0; j < k; ++j) {
            const auto [lo, hi] = range(j);
            const int off = j - pad_left;
            if (gwr) {
              double acc = 0.0;
              for (int t = lo; t <= hi; ++t) acc += g[t] * xr[t * stride + off];
              gwr[j] += acc;
            }
            if (gxr) {
              const double wj = w[j];
              for (int t = lo; t <= hi; ++t) gxr[t * stride + off] += wj * g[t];
            }
          }
        }
      }
    }
  });
}

Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias, int stride, int crop_left,
                     int out_len) {
  const Tensor &xv = x->value, &wv = weight->value;
  const int batch = xv.n(), cin = xv.c(), tin = xv.t();
  const int cout = wv.c(), k = wv.t();
  if (wv.n() != cin) {
    throw Error("conv_transpose1d: input has " + std::to_string(cin) + " channels, weights expect " +
                std::to_string(wv.n()));
  }
  if (bias->value.c() != cout) throw Error("conv_transpose1d: bias size mismatch");
  if (stride < 1 || out_len < 1 || crop_left < 0) throw Error("conv_transpose1d: invalid geometry");

  // Input positions t with 0 <= t*stride + j - crop_left < out_len.
  auto range = [=](int j) {
    const int off = j - crop_left;
    int lo = off >= 0 ? 0 : (-off + stride - 1) / stride;
    int hi = (out_len - 1 - off) >= 0 ? std::min(tin - 1, (out_len - 1 - off) / stride) : -1;
    return std::pair{lo, hi};
  };

  Tensor out(batch, cout, out_len);
  for (int n = 0; n < batch; ++n) {
    for (int co = 0; co < cout; ++co) std::fill_n(out.row(n, co), out_len, bias->value(0, co, 0));
    for (int ci = 0; ci < cin; ++ci) {
      const double* xr = xv.row(n, ci);
      for (int co = 0; co < cout; ++co) {
        double* y = out.row(n, co);
        const double* w = wv.row(ci, co);
        for (int j = 0; j < k; ++j) {
          const auto [lo, hi] = range(j);
          const int off = j - crop_left;
          const double wj = w[j];
          for (int t = lo; t <= hi; ++t) y[t * stride + off] += wj * xr[t];
        }
      }
    }
  }
  return make_node(std::move(out), {x, weight, bias}, [=](Node& self) {
    const Tensor& gy = self.grad;
    Tensor* gx = x->requires_grad ? &x->grad_buffer() : nullptr;
    Tensor* gw = weight->requires_grad ? &weight->grad_buffer() : nullptr;
    Tensor* gb = bias->requires_grad ? &bias->grad_buffer() : nullptr;
    const Tensor& xval = x->value;
    const Tensor& wval = weight->value;
    for (int n = 0; n < batch; ++n) {
      if (gb) {
        for (int co = 0; co < cout; ++co) {
          const double* g = gy.row(n, co);
          double acc = 0.0;
          for (int t = 0; t < out_len; ++t) acc += g[t];
          (*gb)(0, co, 0) += acc;
        }
      }
      for (int ci = 0; ci < cin; ++ci) {
        const double* xr = xval.row(n, ci);
        double* gxr = gx ? gx->row(n, ci) : nullptr;
        for (int co = 0; co < cout; ++co) {
          const double* g = gy.row(n, co);
          const double* w = wval.row(ci, co);
          double* gwr = gw ? gw->row(ci, co) : nullptr;
          for (int j = 0; j < k; ++j) {
            const auto [lo, hi] = range(j);
            const int off = j - crop_left;
            if (gwr) {
              double acc = 0.0;
              for (int t = lo; t <= hi; ++t) acc += g[t * stride + off] * xr[t];
              gwr[j] += acc;
            }
            if (gxr) {
              const double wj = w[j];
              for (int t = lo; t <= hi; ++t) gxr[t] += wj * g[t * stride + off];
            }
          }
        }
      }
    }
  });
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state, bool training,
               bool update_stats) {
  const Tensor& v = x->value;
  const int batch = v.n(), ch = v.c(), len = v.t();
  if (gamma->value.c() != ch || beta->value.c() != ch) throw Error("batch_norm: channel count mismatch");
  if (state.running_mean.c() != ch) {
    state.running_mean = Tensor(1, ch, 1, 0.0);
    state.running_var = Tensor(1, ch, 1, 1.0);
  }
  const double count = static_cast<double>(batch) * len;
  std::vector<double> mean(ch), inv_std(ch);
  for (int c = 0; c < ch; ++c) {
    if (training) {
      double s = 0.0, s2 = 0.0;
      for (int n = 0; n < batch; ++n) {
        const double* r = v.row(n, c);
        for (int t = 0; t < len; ++t) s += r[t];
      }
      const double m = s / count;
      for (int n = 0; n < batch; ++n) {
        const double* r = v.row(n, c);
        for (int t = 0; t < len; ++t) s2 += (r[t] - m) * (r[t] - m);
      }
      const double var = s2 / count;
      mean[c] = m;
      inv_std[c] = 1.0 / std::sqrt(var + state.eps);
      if (update_stats) {
        const double unbiased = count > 1 ? s2 / (count - 1) : var;
        state.running_mean(0, c, 0) = (1 - state.momentum) * state.running_mean(0, c, 0) + state.momentum * m;
        state.running_var(0, c, 0) = (1 - state.momentum) * state.running_var(0, c, 0) + state.momentum * unbiased;
      }
    } else {
      mean[c] = state.running_mean(0, c, 0);
      inv_std[c] = 1.0 / std::sqrt(state.running_var(0, c, 0) + state.eps);
    }
  }
  Tensor xhat(batch, ch, len), out(batch, ch, len);
  for (int n = 0; n < batch; ++n) {
    for (int c = 0; c < ch; ++c) {
      const double* r = v.row(n, c);
      double* h = xhat.row(n, c);
      double* o = out.row(n, c);
      const double g = gamma->value(0, c, 0), b = beta->value(0, c, 0);
      for (int t = 0; t < len; ++t) {
        h[t] = (r[t] - mean[c]) * inv_std[c];
        o[t] = g * h[t] + b;
      }
    }
  }
  return make_node(std::move(out), {x, gamma, beta},
                   [=, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
    const Tensor& gy = self.grad;
    for (int c = 0; c < ch; ++c) {
      double sum_g = 0.0, sum_gh = 0.0;
      for (int n = 0; n < batch; ++n) {
        const double* g = gy.row(n, c);
        const double* h = xhat.row(n, c);
        for (int t = 0; t < len; ++t) {
          sum_g += g[t];
          sum_gh += g[t] * h[t];
        }
      }
      if (gamma->requires_grad) gamma->grad_buffer()(0, c, 0) += sum_gh;
      if (beta->requires_grad) beta->grad_buffer()(0, c, 0) += sum_g;
      if (!x->requires_grad) continue;
      auto& gx = x->grad_buffer();
      const double gm = gamma->value(0, c, 0);
      for (int n = 0; n < batch; ++n) {
        const double* g = gy.row(n, c);
        const double* h = xhat.row(n, c);
        double* d = gx.row(n, c);
        for (int t = 0; t < len; ++t) {
          if (training) {
            d[t] += gm * inv_std[c] * (g[t] - sum_g / count - h[t] * sum_gh / count);
          } else {
            d[t] += gm * inv_std[c] * g[t];
          }
        }
      }
    }
  });
}

Var reparameterize(const Var& mean, const Var& logvar, const Tensor& eps) {
  require_same(mean->value, logvar->value, "reparameterize");
  require_same(mean->value, eps, "reparameterize");
  Tensor out = mean->value;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += std::exp(0.5 * logvar->value[i]) * eps[i];
  return make_node(std::move(out), {mean, logvar}, [mean, logvar, eps](Node& self) {
    if (mean->requires_grad) mean->grad_buffer().add(self.grad);
    if (logvar->requires_grad) {
      auto& g = logvar->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] += self.grad[i] * 0.5 * std::exp(0.5 * logvar->value[i]) * eps[i];
      }
    }
  });
}

Var l1_loss(const Var& a, const Var& b) {
  require_same(a->value, b->value, "l1_loss");
  const double inv = 1.0 / static_cast<double>(a->value.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < a->value.size(); ++i) acc += std::abs(a->value[i] - b->value[i]);
  return make_node(scalar_tensor(acc * inv), {a, b}, [a, b, inv](Node& self) {
    const double g = self.grad[0] * inv;
    for (std::size_t i = 0; i < a->value.size(); ++i) {
      const double d = a->value[i] - b->value[i];
      const double s = d > 0 ? g : (d < 0 ? -g : 0.0);
      if (a->requires_grad) a->grad_buffer()[i] += s;
      if (b->requires_grad) b->grad_buffer()[i] -= s;
    }
  });
}

Var bce_with_logits(const Var& logits, double target) {
  const Tensor& v = logits->value;
  const double inv = 1.0 / static_cast<double>(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    // -[y log s(x) + (1-y) log(1-s(x))] = softplus(x) - y x
    acc += softplus(v[i]) - target * v[i];
  }
  return make_node(scalar_tensor(acc * inv), {logits}, [logits, target, inv](Node& self) {
    auto& g = logits->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[0] * inv * (sigm(logits->value[i]) - target);
    }
  });
}

Tensor softmax(const Tensor& logits) {
  Tensor out(logits.n(), logits.c(), 1);
  for (int n = 0; n < logits.n(); ++n) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < logits.c(); ++d) mx = std::max(mx, logits(n, d, 0));
    double z = 0.0;
    for (int d = 0; d < logits.c(); ++d) z += std::exp(logits(n, d, 0) - mx);
    for (int d = 0; d < logits.c(); ++d) out(n, d, 0) = std::exp(logits(n, d, 0) - mx) / z;
  }
  return out;
}

Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels) {
  const Tensor& v = logits->value;
  if (v.t() != 1) throw Error("softmax_cross_entropy: expected N x D x 1 logits");
  if (static_cast<int>(labels.size()) != v.n()) throw Error("softmax_cross_entropy: label count mismatch");
  Tensor p = softmax(v);
  double acc = 0.0;
  for (int n = 0; n < v.n(); ++n) {
    if (labels[n] < 0 || labels[n] >= v.c()) throw Error("softmax_cross_entropy: label out of range");
    double mx = -std::numeric_limits<double>::infinity();
    for (int d = 0; d < v.c(); ++d) mx = std::max(mx, v(n, d, 0));
    double z = 0.0;
    for (int d = 0; d < v.c(); ++d) z += std::exp(v(n, d, 0) - mx);
    acc += -(v(n, labels[n], 0) - mx - std::log(z));
  }
  const double inv = 1.0 / v.n();
  return make_node(scalar_tensor(acc * inv), {logits}, [logits, labels, inv, p = std::move(p)](Node& self) {
    auto& g = logits->grad_buffer();
    for (int n = 0; n < g.n(); ++n) {
      for (int d = 0; d < g.c(); ++d) {
        g(n, d, 0) += self.grad[0] * inv * (p(n, d, 0) - (d == labels[n] ? 1.0 : 0.0));
      }
    }
  });
}

Var gaussian_nll(const Var& x, const Var& mean, const Var& logvar) {
  require_same(x->value, mean->value, "gaussian_nll");
  require_same(x->value, logvar->value, "gaussian_nll");
  const Tensor& xv = x->value;
  const double frames = static_cast<double>(xv.n()) * xv.t();
  const double log2pi = std::log(2.0 * std::numbers::pi);
  double acc = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double d = xv[i] - mean->value[i];
    acc += logvar->value[i] + d * d * std::exp(-logvar->value[i]) + log2pi;
  }
  return make_node(scalar_tensor(0.5 * acc / frames), {x, mean, logvar}, [x, mean, logvar, frames](Node& self) {
    const double g = self.grad[0] / frames;
    for (std::size_t i = 0; i < x->value.size(); ++i) {
      const double d = x->value[i] - mean->value[i];
      const double prec = std::exp(-logvar->value[i]);
      if (x->requires_grad) x->grad_buffer()[i] += g * d * prec;
      if (mean->requires_grad) mean->grad_buffer()[i] -= g * d * prec;
      if (logvar->requires_grad) logvar->grad_buffer()[i] += g * 0.5 * (1.0 - d * d * prec);
    }
  });
}

Var gaussian_nll(const Tensor& x, const Var& mean, const Var& logvar) {
  return gaussian_nll(constant(x), mean, logvar);
}

Var kl_standard_normal(const Var& mean, const Var& logvar) {
  require_same(mean->value, logvar->value, "kl_standard_normal");
  const Tensor& m = mean->value;
  const double frames = static_cast<double>(m.n()) * m.t();
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double lv = logvar->value[i];
    acc += std::exp(lv) + m[i] * m[i] - 1.0 - lv;
  }
  return make_node(scalar_tensor(0.5 * acc / frames), {mean, logvar}, [mean, logvar, frames](Node& self) {
    const double g = self.grad[0] / frames;
    for (std::size_t i = 0; i < mean->value.size(); ++i) {
      if (mean->requires_grad) mean->grad_buffer()[i] += g * mean->value[i];
      if (logvar->requires_grad) logvar->grad_buffer()[i] += g * 0.5 * (std::exp(logvar->value[i]) - 1.0);
    }
  });
}

double kl_diag_gaussian(std::span<const double> mean, std::span<const double> var) {
  if (mean.size() != var.size()) throw Error("kl_diag_gaussian: mean and variance sizes differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    if (!(var[i] > 0.0)) throw Error("kl_diag_gaussian: variance must be positive");
    acc += var[i] + mean[i] * mean[i] - 1.0 - std::log(var[i]);
  }
  return 0.5 * acc;
}

}  // namespace dogvc::nets
