// numerics/autodiff.cc

// Copyright 2026  The DualNER Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "dualner/numerics/autodiff.h"

#include <cmath>
#include <cstring>
#include <limits>

namespace dualner {

namespace {

void Require(bool cond, const char *msg) {
  if (!cond) throw ContractError(msg);
}

// c[m,n] += a[m,k] * b[k,n]
template <typename Real>
void GemmAcc(const Real *__restrict a, const Real *__restrict b,
             Real *__restrict c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    Real *ci = c + std::size_t(i) * n;
    const Real *ai = a + std::size_t(i) * k;
    for (int p = 0; p < k; ++p) {
      const Real av = ai[p];
      if (av == Real(0)) continue;
      const Real *bp = b + std::size_t(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// c[k,n] += a[m,k]^T * b[m,n]
template <typename Real>
void GemmTransAAcc(const Real *__restrict a, const Real *__restrict b,
                   Real *__restrict c, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    const Real *ai = a + std::size_t(i) * k;
    const Real *bi = b + std::size_t(i) * n;
    for (int p = 0; p < k; ++p) {
      const Real av = ai[p];
      if (av == Real(0)) continue;
      Real *cp = c + std::size_t(p) * n;
      for (int j = 0; j < n; ++j) cp[j] += av * bi[j];
    }
  }
}

template <typename Real>
std::vector<Real> Transpose(const Real *a, int rows, int cols) {
  std::vector<Real> t(std::size_t(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t[std::size_t(j) * rows + i] = a[std::size_t(i) * cols + j];
  return t;
}

template <typename Real>
Graph<Real> &GraphOf(const Var<Real> &a) {
  Require(a.valid(), "operation on an empty Var");
  return *a.graph();
}

template <typename Real>
Graph<Real> &GraphOf(const Var<Real> &a, const Var<Real> &b) {
  Require(a.valid() && b.valid() && a.graph() == b.graph(),
          "operands belong to different graphs");
  return *a.graph();
}

}  // namespace

template <typename Real>
Var<Real> Graph<Real>::Push(OpKind op, std::vector<int> inputs,
                            BasicTensor<Real> value,
                            typename Node<Real>::BackwardFn backward) {
  auto n = std::make_unique<Node<Real>>();
  n->op = op;
  n->needs_grad = false;
  for (int i : inputs) n->needs_grad = n->needs_grad || nodes_[i]->needs_grad;
  n->inputs = std::move(inputs);
  n->value = std::move(value);
  if (n->needs_grad) n->backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var<Real>(this, static_cast<int>(nodes_.size()) - 1);
}

template <typename Real>
Var<Real> Graph<Real>::Param(Parameter<Real> &p) {
  auto n = std::make_unique<Node<Real>>();
  n->op = OpKind::kParameter;
  n->external = &p.value;
  n->param = record_grad_ ? &p : nullptr;
  n->needs_grad = record_grad_;
  nodes_.push_back(std::move(n));
  return Var<Real>(this, static_cast<int>(nodes_.size()) - 1);
}

template <typename Real>
Var<Real> Graph<Real>::Constant(BasicTensor<Real> value) {
  auto n = std::make_unique<Node<Real>>();
  n->op = OpKind::kConstant;
  n->value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var<Real>(this, static_cast<int>(nodes_.size()) - 1);
}

template <typename Real>
BasicTensor<Real> *Graph<Real>::GradOf(int id) {
  Node<Real> &n = *nodes_[id];
  if (!n.needs_grad) return nullptr;
  if (n.param != nullptr) return &n.param->grad;
  return &n.grad;
}

template <typename Real>
void Graph<Real>::Backward(const Var<Real> &loss) {
  if (loss.graph() != this) throw ContractError("loss belongs to another graph");
  if (node(loss.id()).Value().size() != 1)
    throw ContractError("backward requires a scalar loss");
  const int last = loss.id();
  for (int i = 0; i <= last; ++i) {
    Node<Real> &n = *nodes_[i];
    if (n.needs_grad && n.param == nullptr) {
      if (n.grad.SameShape(n.value)) {
        n.grad.SetZero();
      } else {
        n.grad = BasicTensor<Real>(n.value.shape());
      }
    }
  }
  if (!node(last).needs_grad) return;
  (*GradOf(last))[0] += Real(1);
  for (int i = last; i >= 0; --i) {
    Node<Real> &n = *nodes_[i];
    if (n.needs_grad && n.backward) n.backward(*this, i);
  }
}

// ---------------------------------------------------------------------------

template <typename Real>
Var<Real> MatMul(const Var<Real> &a, const Var<Real> &b) {
  Graph<Real> &g = GraphOf(a, b);
  const auto &av = a.value();
  const auto &bv = b.value();
  const int m = av.rows(), k = av.cols(), n = bv.cols();
  Require(bv.rows() == k, "matmul inner dimensions differ");
  BasicTensor<Real> out({m, n});
  GemmAcc(av.data(), bv.data(), out.data(), m, k, n);
  const int ia = a.id(), ib = b.id();
  return g.Push(OpKind::kMatMul, {ia, ib}, std::move(out),
                [ia, ib, m, k, n](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  const auto &av = g.node(ia).Value();
                  const auto &bv = g.node(ib).Value();
                  if (auto *ga = g.GradOf(ia)) {
                    // dA[m,k] += dY[m,n] * B^T
                    std::vector<Real> bt = Transpose(bv.data(), k, n);
                    GemmAcc(gy.data(), bt.data(), ga->data(), m, n, k);
                  }
                  if (auto *gb = g.GradOf(ib)) {
                    GemmTransAAcc(av.data(), gy.data(), gb->data(), m, k, n);
                  }
                });
}

template <typename Real>
Var<Real> Add(const Var<Real> &a, const Var<Real> &b) {
  Graph<Real> &g = GraphOf(a, b);
  Require(a.value().size() == b.value().size(), "add size mismatch");
  BasicTensor<Real> out = a.value();
  const auto &bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const int ia = a.id(), ib = b.id();
  return g.Push(OpKind::kAdd, {ia, ib}, std::move(out),
                [ia, ib](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  for (int id : {ia, ib}) {
                    if (auto *gx = g.GradOf(id)) {
                      for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += gy[i];
                    }
                  }
                });
}

template <typename Real>
Var<Real> AddBias(const Var<Real> &a, const Var<Real> &bias) {
  Graph<Real> &g = GraphOf(a, bias);
  const int n = a.value().cols();
  Require(static_cast<int>(bias.value().size()) == n, "bias width mismatch");
  BasicTensor<Real> out = a.value();
  const auto &bv = bias.value();
  const int m = out.rows();
  for (int i = 0; i < m; ++i) {
    Real *r = out.data() + std::size_t(i) * n;
    for (int j = 0; j < n; ++j) r[j] += bv[j];
  }
  const int ia = a.id(), ib = bias.id();
  return g.Push(OpKind::kAddBias, {ia, ib}, std::move(out),
                [ia, ib, m, n](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  if (auto *ga = g.GradOf(ia)) {
                    for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i];
                  }
                  if (auto *gb = g.GradOf(ib)) {
                    for (int i = 0; i < m; ++i) {
                      const Real *r = gy.data() + std::size_t(i) * n;
                      for (int j = 0; j < n; ++j) (*gb)[j] += r[j];
                    }
                  }
                });
}

template <typename Real>
Var<Real> Sub(const Var<Real> &a, const Var<Real> &b) {
  Graph<Real> &g = GraphOf(a, b);
  Require(a.value().size() == b.value().size(), "sub size mismatch");
  BasicTensor<Real> out = a.value();
  const auto &bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  const int ia = a.id(), ib = b.id();
  return g.Push(OpKind::kSub, {ia, ib}, std::move(out),
                [ia, ib](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  if (auto *ga = g.GradOf(ia))
                    for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i];
                  if (auto *gb = g.GradOf(ib))
                    for (std::size_t i = 0; i < gy.size(); ++i) (*gb)[i] -= gy[i];
                });
}

template <typename Real>
Var<Real> Mul(const Var<Real> &a, const Var<Real> &b) {
  Graph<Real> &g = GraphOf(a, b);
  Require(a.value().size() == b.value().size(), "mul size mismatch");
  BasicTensor<Real> out = a.value();
  const auto &bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  const int ia = a.id(), ib = b.id();
  return g.Push(OpKind::kMul, {ia, ib}, std::move(out),
                [ia, ib](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  const auto &av = g.node(ia).Value();
                  const auto &bv = g.node(ib).Value();
                  if (auto *ga = g.GradOf(ia))
                    for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += gy[i] * bv[i];
                  if (auto *gb = g.GradOf(ib))
                    for (std::size_t i = 0; i < gy.size(); ++i) (*gb)[i] += gy[i] * av[i];
                });
}

template <typename Real>
Var<Real> Scale(const Var<Real> &a, double factor) {
  Graph<Real> &g = GraphOf(a);
  BasicTensor<Real> out = a.value();
  const Real f = static_cast<Real>(factor);
  for (auto &v : out.storage()) v *= f;
  const int ia = a.id();
  return g.Push(OpKind::kScale, {ia}, std::move(out),
                [ia, f](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  if (auto *ga = g.GradOf(ia))
                    for (std::size_t i = 0; i < gy.size(); ++i) (*ga)[i] += f * gy[i];
                });
}

template <typename Real>
Var<Real> Sum(const Var<Real> &a) {
  Graph<Real> &g = GraphOf(a);
  double s = 0.0;
  for (Real v : a.value().storage()) s += v;
  const int ia = a.id();
  return g.Push(OpKind::kSum, {ia}, BasicTensor<Real>::Scalar(static_cast<Real>(s)),
                [ia](Graph<Real> &g, int self) {
                  const Real gy = g.node(self).grad[0];
                  if (auto *ga = g.GradOf(ia))
                    for (auto &v : ga->storage()) v += gy;
                });
}

template <typename Real>
Var<Real> Mean(const Var<Real> &a) {
  return Scale(Sum(a), 1.0 / static_cast<double>(a.value().size()));
}

template <typename Real>
Var<Real> ConcatCols(const Var<Real> &a, const Var<Real> &b) {
  Graph<Real> &g = GraphOf(a, b);
  const auto &av = a.value();
  const auto &bv = b.value();
  const int m = av.rows(), p = av.cols(), q = bv.cols();
  Require(bv.rows() == m, "concat row mismatch");
  BasicTensor<Real> out({m, p + q});
  for (int i = 0; i < m; ++i) {
    std::copy_n(av.data() + std::size_t(i) * p, p, out.data() + std::size_t(i) * (p + q));
    std::copy_n(bv.data() + std::size_t(i) * q, q, out.data() + std::size_t(i) * (p + q) + p);
  }
  const int ia = a.id(), ib = b.id();
  return g.Push(OpKind::kConcatCols, {ia, ib}, std::move(out),
                [ia, ib, m, p, q](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  auto *ga = g.GradOf(ia);
                  auto *gb = g.GradOf(ib);
                  for (int i = 0; i < m; ++i) {
                    const Real *r = gy.data() + std::size_t(i) * (p + q);
                    if (ga)
                      for (int j = 0; j < p; ++j) (*ga)[std::size_t(i) * p + j] += r[j];
                    if (gb)
                      for (int j = 0; j < q; ++j) (*gb)[std::size_t(i) * q + j] += r[p + j];
                  }
                });
}

template <typename Real>
Var<Real> SliceRows(const Var<Real> &a, int begin, int end) {
  Graph<Real> &g = GraphOf(a);
  const auto &av = a.value();
  const int n = av.cols();
  Require(0 <= begin && begin < end && end <= av.rows(), "slice out of range");
  std::vector<Real> data(av.data() + std::size_t(begin) * n, av.data() + std::size_t(end) * n);
  const int ia = a.id();
  return g.Push(OpKind::kSliceRows, {ia},
                BasicTensor<Real>({end - begin, n}, std::move(data)),
                [ia, begin, n](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  if (auto *ga = g.GradOf(ia)) {
                    Real *dst = ga->data() + std::size_t(begin) * n;
                    for (std::size_t i = 0; i < gy.size(); ++i) dst[i] += gy[i];
                  }
                });
}

template <typename Real>
Var<Real> GatherRows(const Var<Real> &a, const std::vector<int> &rows) {
  Graph<Real> &g = GraphOf(a);
  const auto &av = a.value();
  const int n = av.cols(), m = av.rows();
  Require(!rows.empty(), "gather of zero rows");
  BasicTensor<Real> out({static_cast<int>(rows.size()), n});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= m) throw DomainError("gather index out of range");
    std::copy_n(av.data() + std::size_t(rows[i]) * n, n, out.data() + i * n);
  }
  const int ia = a.id();
  return g.Push(OpKind::kGatherRows, {ia}, std::move(out),
                [ia, rows, n](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  if (auto *ga = g.GradOf(ia)) {
                    for (std::size_t i = 0; i < rows.size(); ++i) {
                      Real *dst = ga->data() + std::size_t(rows[i]) * n;
                      const Real *src = gy.data() + i * n;
                      for (int j = 0; j < n; ++j) dst[j] += src[j];
                    }
                  }
                });
}

template <typename Real>
Var<Real> LayerNorm(const Var<Real> &x, const Var<Real> &gain,
                    const Var<Real> &bias, double eps) {
  Graph<Real> &g = GraphOf(x, gain);
  const auto &xv = x.value();
  const int m = xv.rows(), n = xv.cols();
  Require(static_cast<int>(gain.value().size()) == n &&
              static_cast<int>(bias.value().size()) == n,
          "layer norm parameter width mismatch");
  BasicTensor<Real> out(xv.shape());
  std::vector<Real> xhat(xv.size());
  std::vector<Real> rstd(m);
  const auto &gv = gain.value();
  const auto &bv = bias.value();
  for (int i = 0; i < m; ++i) {
    const Real *r = xv.data() + std::size_t(i) * n;
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += r[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (r[j] - mean) * (r[j] - mean);
    var /= n;
    const double rs = 1.0 / std::sqrt(var + eps);
    rstd[i] = static_cast<Real>(rs);
    for (int j = 0; j < n; ++j) {
      const Real h = static_cast<Real>((r[j] - mean) * rs);
      xhat[std::size_t(i) * n + j] = h;
      out[std::size_t(i) * n + j] = h * gv[j] + bv[j];
    }
  }
  const int ix = x.id(), ig = gain.id(), ib = bias.id();
  return g.Push(
      OpKind::kLayerNorm, {ix, ig, ib}, std::move(out),
      [ix, ig, ib, m, n, xhat = std::move(xhat), rstd = std::move(rstd)](
          Graph<Real> &g, int self) {
        const auto &gy = g.node(self).grad;
        const auto &gv = g.node(ig).Value();
        if (auto *gg = g.GradOf(ig)) {
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
              (*gg)[j] += gy[std::size_t(i) * n + j] * xhat[std::size_t(i) * n + j];
        }
        if (auto *gb = g.GradOf(ib)) {
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) (*gb)[j] += gy[std::size_t(i) * n + j];
        }
        if (auto *gx = g.GradOf(ix)) {
          for (int i = 0; i < m; ++i) {
            const Real *dy = gy.data() + std::size_t(i) * n;
            const Real *h = xhat.data() + std::size_t(i) * n;
            double mean_d = 0.0, mean_dh = 0.0;
            for (int j = 0; j < n; ++j) {
              const double d = double(dy[j]) * gv[j];
              mean_d += d;
              mean_dh += d * h[j];
            }
            mean_d /= n;
            mean_dh /= n;
            Real *dx = gx->data() + std::size_t(i) * n;
            for (int j = 0; j < n; ++j) {
              const double d = double(dy[j]) * gv[j];
              dx[j] += static_cast<Real>(rstd[i] * (d - mean_d - h[j] * mean_dh));
            }
          }
        }
      });
}

template <typename Real>
Var<Real> Gelu(const Var<Real> &x) {
  Graph<Real> &g = GraphOf(x);
  const auto &xv = x.value();
  BasicTensor<Real> out(xv.shape());
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    out[i] = static_cast<Real>(0.5 * v * (1.0 + std::tanh(kC * (v + 0.044715 * v * v * v))));
  }
  const int ix = x.id();
  return g.Push(OpKind::kGelu, {ix}, std::move(out), [ix](Graph<Real> &g, int self) {
    const auto &gy = g.node(self).grad;
    const auto &xv = g.node(ix).Value();
    if (auto *gx = g.GradOf(ix)) {
      for (std::size_t i = 0; i < xv.size(); ++i) {
        const double v = xv[i];
        const double t = std::tanh(kC * (v + 0.044715 * v * v * v));
        const double d = 0.5 * (1.0 + t) +
                         0.5 * v * (1.0 - t * t) * kC * (1.0 + 3.0 * 0.044715 * v * v);
        (*gx)[i] += static_cast<Real>(gy[i] * d);
      }
    }
  });
}

namespace {

template <typename Real>
void SoftmaxRow(const Real *in, Real *out, int n) {
  Real mx = in[0];
  for (int j = 1; j < n; ++j) mx = std::max(mx, in[j]);
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double e = std::exp(double(in[j] - mx));
    out[j] = static_cast<Real>(e);
    s += e;
  }
  for (int j = 0; j < n; ++j) out[j] = static_cast<Real>(out[j] / s);
}

}  // namespace

template <typename Real>
Var<Real> SoftmaxRows(const Var<Real> &x) {
  Graph<Real> &g = GraphOf(x);
  const auto &xv = x.value();
  const int m = xv.rows(), n = xv.cols();
  BasicTensor<Real> out(xv.shape());
  for (int i = 0; i < m; ++i)
    SoftmaxRow(xv.data() + std::size_t(i) * n, out.data() + std::size_t(i) * n, n);
  const int ix = x.id();
  return g.Push(OpKind::kSoftmaxRows, {ix}, std::move(out),
                [ix, m, n](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  const auto &y = g.node(self).value;
                  if (auto *gx = g.GradOf(ix)) {
                    for (int i = 0; i < m; ++i) {
                      const Real *yr = y.data() + std::size_t(i) * n;
                      const Real *gr = gy.data() + std::size_t(i) * n;
                      double dot = 0.0;
                      for (int j = 0; j < n; ++j) dot += double(gr[j]) * yr[j];
                      Real *dx = gx->data() + std::size_t(i) * n;
                      for (int j = 0; j < n; ++j)
                        dx[j] += static_cast<Real>(yr[j] * (gr[j] - dot));
                    }
                  }
                });
}

template <typename Real>
Var<Real> Dropout(const Var<Real> &x, double rate, std::mt19937_64 &rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw DomainError("dropout rate must be below 1");
  Graph<Real> &g = GraphOf(x);
  const auto &xv = x.value();
  const Real keep_scale = static_cast<Real>(1.0 / (1.0 - rate));
  std::vector<Real> mask(xv.size());
  BasicTensor<Real> out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = UniformUnit(rng) < rate ? Real(0) : keep_scale;
    out[i] = xv[i] * mask[i];
  }
  const int ix = x.id();
  return g.Push(OpKind::kDropout, {ix}, std::move(out),
                [ix, mask = std::move(mask)](Graph<Real> &g, int self) {
                  const auto &gy = g.node(self).grad;
                  if (auto *gx = g.GradOf(ix))
                    for (std::size_t i = 0; i < gy.size(); ++i) (*gx)[i] += gy[i] * mask[i];
                });
}

template <typename Real>
Var<Real> SegmentAttention(const Var<Real> &q, const Var<Real> &k,
                           const Var<Real> &v,
                           const std::vector<Segment> &segments, int heads) {
  Graph<Real> &g = GraphOf(q, k);
  const auto &qv = q.value();
  const auto &kv = k.value();
  const auto &vv = v.value();
  const int d = qv.cols();
  Require(heads >= 1 && d % heads == 0, "model width not divisible by heads");
  Require(kv.SameShape(qv) && vv.SameShape(qv), "q/k/v shape mismatch");
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  BasicTensor<Real> out(qv.shape());
  // probs per (segment, head): n x n blocks, stored back to back.
  std::vector<Real> probs;
  std::vector<std::size_t> offsets;
  for (const Segment &s : segments) {
    Require(s.length >= 1 && s.begin + s.length <= qv.rows(), "bad segment");
    const int n = s.length;
    for (int h = 0; h < heads; ++h) {
      offsets.push_back(probs.size());
      probs.resize(probs.size() + std::size_t(n) * n);
      Real *p = probs.data() + offsets.back();
      for (int i = 0; i < n; ++i) {
        const Real *qi = qv.data() + std::size_t(s.begin + i) * d + h * dh;
        for (int j = 0; j < n; ++j) {
          const Real *kj = kv.data() + std::size_t(s.begin + j) * d + h * dh;
          Real dot = 0;
          for (int t = 0; t < dh; ++t) dot += qi[t] * kj[t];
          p[std::size_t(i) * n + j] = static_cast<Real>(dot * scale);
        }
        SoftmaxRow(p + std::size_t(i) * n, p + std::size_t(i) * n, n);
        Real *oi = out.data() + std::size_t(s.begin + i) * d + h * dh;
        for (int j = 0; j < n; ++j) {
          const Real pij = p[std::size_t(i) * n + j];
          const Real *vj = vv.data() + std::size_t(s.begin + j) * d + h * dh;
          for (int t = 0; t < dh; ++t) oi[t] += pij * vj[t];
        }
      }
    }
  }
  const int iq = q.id(), ik = k.id(), iv = v.id();
  return g.Push(
      OpKind::kSegmentAttention, {iq, ik, iv}, std::move(out),
      [iq, ik, iv, segments, heads, d, dh, scale, probs = std::move(probs),
       offsets = std::move(offsets)](Graph<Real> &g, int self) {
        const auto &gy = g.node(self).grad;
        const auto &qv = g.node(iq).Value();
        const auto &kv = g.node(ik).Value();
        const auto &vv = g.node(iv).Value();
        auto *gq = g.GradOf(iq);
        auto *gk = g.GradOf(ik);
        auto *gv = g.GradOf(iv);
        std::size_t block = 0;
        std::vector<Real> ds;
        for (const Segment &s : segments) {
          const int n = s.length;
          ds.assign(std::size_t(n) * n, Real(0));
          for (int h = 0; h < heads; ++h, ++block) {
            const Real *p = probs.data() + offsets[block];
            for (int i = 0; i < n; ++i) {
              const Real *gi = gy.data() + std::size_t(s.begin + i) * d + h * dh;
              // dP_ij = dO_i . V_j ; dS = P * (dP - sum_j P dP)
              double rowdot = 0.0;
              for (int j = 0; j < n; ++j) {
                const Real *vj = vv.data() + std::size_t(s.begin + j) * d + h * dh;
                Real dp = 0;
                for (int t = 0; t < dh; ++t) dp += gi[t] * vj[t];
                ds[std::size_t(i) * n + j] = dp;
                rowdot += double(dp) * p[std::size_t(i) * n + j];
              }
              for (int j = 0; j < n; ++j) {
                const std::size_t ij = std::size_t(i) * n + j;
                ds[ij] = static_cast<Real>(p[ij] * (ds[ij] - rowdot) * scale);
              }
              if (gv) {
                for (int j = 0; j < n; ++j) {
                  const Real pij = p[std::size_t(i) * n + j];
                  Real *dvj = gv->data() + std::size_t(s.begin + j) * d + h * dh;
                  for (int t = 0; t < dh; ++t) dvj[t] += pij * gi[t];
                }
              }
            }
            for (int i = 0; i < n; ++i) {
              const Real *qi = qv.data() + std::size_t(s.begin + i) * d + h * dh;
              Real *dqi = gq ? gq->data() + std::size_t(s.begin + i) * d + h * dh : nullptr;
              for (int j = 0; j < n; ++j) {
                const Real dsij = ds[std::size_t(i) * n + j];
                if (dsij == Real(0)) continue;
                const Real *kj = kv.data() + std::size_t(s.begin + j) * d + h * dh;
                if (dqi)
                  for (int t = 0; t < dh; ++t) dqi[t] += dsij * kj[t];
                if (gk) {
                  Real *dkj = gk->data() + std::size_t(s.begin + j) * d + h * dh;
                  for (int t = 0; t < dh; ++t) dkj[t] += dsij * qi[t];
                }
              }
            }
          }
        }
      });
}

template <typename Real>
Var<Real> SoftmaxCrossEntropy(const Var<Real> &logits,
                              const std::vector<int> &targets,
                              const std::vector<double> &weights) {
  Graph<Real> &g = GraphOf(logits);
  const auto &lv = logits.value();
  const int m = lv.rows(), n = lv.cols();
  Require(static_cast<int>(targets.size()) == m &&
              static_cast<int>(weights.size()) == m,
          "cross-entropy targets/weights must have one entry per row");
  std::vector<Real> probs(lv.size());
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    if (targets[i] < 0 || targets[i] >= n)
      throw DomainError("cross-entropy target out of range");
    Real *p = probs.data() + std::size_t(i) * n;
    SoftmaxRow(lv.data() + std::size_t(i) * n, p, n);
    if (weights[i] == 0.0) continue;
    loss += weights[i] * -std::log(std::max<double>(p[targets[i]], kProbabilityFloor));
  }
  const int il = logits.id();
  return g.Push(OpKind::kSoftmaxCrossEntropy, {il},
                BasicTensor<Real>::Scalar(static_cast<Real>(loss)),
                [il, m, n, targets, weights, probs = std::move(probs)](Graph<Real> &g,
                                                                       int self) {
                  const double gy = g.node(self).grad[0];
                  auto *gl = g.GradOf(il);
                  if (!gl) return;
                  for (int i = 0; i < m; ++i) {
                    if (weights[i] == 0.0) continue;
                    const Real *p = probs.data() + std::size_t(i) * n;
                    if (p[targets[i]] <= kProbabilityFloor) continue;
                    const double w = gy * weights[i];
                    Real *d = gl->data() + std::size_t(i) * n;
                    for (int j = 0; j < n; ++j) d[j] += static_cast<Real>(w * p[j]);
                    d[targets[i]] -= static_cast<Real>(w);
                  }
                });
}

template <typename Real>
Var<Real> SoftmaxKl(const Var<Real> &logits, const BasicTensor<Real> &target,
                    const std::vector<double> &weights) {
  Graph<Real> &g = GraphOf(logits);
  const auto &lv = logits.value();
  const int m = lv.rows(), n = lv.cols();
  Require(target.size() == lv.size(), "KL target shape mismatch");
  Require(static_cast<int>(weights.size()) == m, "KL weights must have one entry per row");
  std::vector<Real> probs(lv.size());
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    Real *q = probs.data() + std::size_t(i) * n;
    SoftmaxRow(lv.data() + std::size_t(i) * n, q, n);
    if (weights[i] == 0.0) continue;
    double kl = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p = target[std::size_t(i) * n + j];
      if (p <= 0.0) continue;
      kl += p * (std::log(std::max(p, kProbabilityFloor)) -
                 std::log(std::max<double>(q[j], kProbabilityFloor)));
    }
    loss += weights[i] * kl;
  }
  const int il = logits.id();
  return g.Push(OpKind::kSoftmaxKl, {il}, BasicTensor<Real>::Scalar(static_cast<Real>(loss)),
                [il, m, n, target, weights, probs = std::move(probs)](Graph<Real> &g,
                                                                      int self) {
                  const double gy = g.node(self).grad[0];
                  auto *gl = g.GradOf(il);
                  if (!gl) return;
                  for (int i = 0; i < m; ++i) {
                    if (weights[i] == 0.0) continue;
                    const Real *q = probs.data() + std::size_t(i) * n;
                    const Real *p = target.data() + std::size_t(i) * n;
                    // d/dz_j of -sum_k p_k log q_k over unclamped k.
                    double active_mass = 0.0;
                    for (int k = 0; k < n; ++k)
                      if (q[k] > kProbabilityFloor) active_mass += p[k];
                    const double w = gy * weights[i];
                    Real *d = gl->data() + std::size_t(i) * n;
                    for (int j = 0; j < n; ++j) {
                      double gj = active_mass * q[j];
                      if (q[j] > kProbabilityFloor) gj -= p[j];
                      d[j] += static_cast<Real>(w * gj);
                    }
                  }
                });
}

template <typename Real>
Var<Real> PairwiseSqDiffSum(const Var<Real> &x) {
  Graph<Real> &g = GraphOf(x);
  const auto &xv = x.value();
  const int m = xv.rows(), n = xv.cols();
  double total = 0.0;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        const double diff = double(xv.at(a, j)) - xv.at(b, j);
        s += diff * diff;
      }
      total += 2.0 * s;  // (a,b) and (b,a)
    }
  }
  const int ix = x.id();
  return g.Push(OpKind::kPairwiseSqDiffSum, {ix},
                BasicTensor<Real>::Scalar(static_cast<Real>(total)),
                [ix, m, n](Graph<Real> &g, int self) {
                  const double gy = g.node(self).grad[0];
                  const auto &xv = g.node(ix).Value();
                  auto *gx = g.GradOf(ix);
                  if (!gx) return;
                  std::vector<double> colsum(n, 0.0);
                  for (int a = 0; a < m; ++a)
                    for (int j = 0; j < n; ++j) colsum[j] += xv.at(a, j);
                  // d/dx_a = 4 * (m x_a - sum_b x_b)
                  for (int a = 0; a < m; ++a)
                    for (int j = 0; j < n; ++j)
                      gx->at(a, j) += static_cast<Real>(
                          gy * 4.0 * (double(m) * xv.at(a, j) - colsum[j]));
                });
}

#define DUALNER_INSTANTIATE(Real)                                                   \
  template class Graph<Real>;                                                       \
  template Var<Real> MatMul(const Var<Real> &, const Var<Real> &);                  \
  template Var<Real> Add(const Var<Real> &, const Var<Real> &);                     \
  template Var<Real> AddBias(const Var<Real> &, const Var<Real> &);                 \
  template Var<Real> Sub(const Var<Real> &, const Var<Real> &);                     \
  template Var<Real> Mul(const Var<Real> &, const Var<Real> &);                     \
  template Var<Real> Scale(const Var<Real> &, double);                              \
  template Var<Real> Sum(const Var<Real> &);                                        \
  template Var<Real> Mean(const Var<Real> &);                                       \
  template Var<Real> ConcatCols(const Var<Real> &, const Var<Real> &);              \
  template Var<Real> SliceRows(const Var<Real> &, int, int);                        \
  template Var<Real> GatherRows(const Var<Real> &, const std::vector<int> &);       \
  template Var<Real> LayerNorm(const Var<Real> &, const Var<Real> &,                \
                               const Var<Real> &, double);                          \
  template Var<Real> Gelu(const Var<Real> &);                                       \
  template Var<Real> SoftmaxRows(const Var<Real> &);                                \
  template Var<Real> Dropout(const Var<Real> &, double, std::mt19937_64 &);         \
  template Var<Real> SegmentAttention(const Var<Real> &, const Var<Real> &,         \
                                      const Var<Real> &,                            \
                                      const std::vector<Segment> &, int);           \
  template Var<Real> SoftmaxCrossEntropy(const Var<Real> &,                         \
                                         const std::vector<int> &,                  \
                                         const std::vector<double> &);              \
  template Var<Real> SoftmaxKl(const Var<Real> &, const BasicTensor<Real> &,        \
                               const std::vector<double> &);                        \
  template Var<Real> PairwiseSqDiffSum(const Var<Real> &);

DUALNER_INSTANTIATE(float)
DUALNER_INSTANTIATE(double)

#undef DUALNER_INSTANTIATE

}  // namespace dualner
