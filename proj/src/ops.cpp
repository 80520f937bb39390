/**
 * Copyright 2026 The MixSemi Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mixsemi/autodiff.hpp"
#include "mixsemi/error.hpp"

namespace mixsemi {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;
using ConstMapVec = Eigen::Map<const Eigen::VectorXd>;
using MapVec = Eigen::Map<Eigen::VectorXd>;

ConstMapMat as_mat(const Tensor& t, std::size_t r, std::size_t c) {
  return ConstMapMat(t.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
MapMat as_mat(Tensor& t, std::size_t r, std::size_t c) {
  return MapMat(t.data(), static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}
ConstMapVec as_vec(const Tensor& t) { return ConstMapVec(t.data(), static_cast<Eigen::Index>(t.size())); }
MapVec as_vec(Tensor& t) { return MapVec(t.data(), static_cast<Eigen::Index>(t.size())); }

void same_tape(Var a, Var b) {
  if (a.tape() != b.tape()) throw UsageError("operands live on different tapes");
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + " expects rank " + std::to_string(rank) + ", got " +
                         shape_str(t.shape()));
  }
}

struct ConvGeometry {
  std::size_t n, c, h, w, f, kh, kw, stride, pad, oh, ow;
  std::size_t patch() const { return c * kh * kw; }
  std::size_t cols() const { return n * oh * ow; }
};

// col is (c*kh*kw) x (n*oh*ow), column index = (img*oh + oy)*ow + ox.
void im2col(const Tensor& x, const ConvGeometry& g, Tensor& col) {
  const std::size_t ncols = g.cols();
  double* out = col.data();
  for (std::size_t ch = 0; ch < g.c; ++ch) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        double* row = out + ((ch * g.kh + ky) * g.kw + kx) * ncols;
        for (std::size_t img = 0; img < g.n; ++img) {
          const double* plane = x.data() + (img * g.c + ch) * g.h * g.w;
          for (std::size_t oy = 0; oy < g.oh; ++oy) {
            const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
            double* dst = row + (img * g.oh + oy) * g.ow;
            if (iy < 0 || iy >= static_cast<long>(g.h)) {
              std::fill_n(dst, g.ow, 0.0);
              continue;
            }
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
              const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
              dst[ox] = (ix < 0 || ix >= static_cast<long>(g.w)) ? 0.0 : plane[iy * static_cast<long>(g.w) + ix];
            }
          }
        }
      }
    }
  }
}

void col2im(const Tensor& col, const ConvGeometry& g, Tensor& dx) {
  const std::size_t ncols = g.cols();
  const double* in = col.data();
  for (std::size_t ch = 0; ch < g.c; ++ch) {
    for (std::size_t ky = 0; ky < g.kh; ++ky) {
      for (std::size_t kx = 0; kx < g.kw; ++kx) {
        const double* row = in + ((ch * g.kh + ky) * g.kw + kx) * ncols;
        for (std::size_t img = 0; img < g.n; ++img) {
          double* plane = dx.data() + (img * g.c + ch) * g.h * g.w;
          for (std::size_t oy = 0; oy < g.oh; ++oy) {
            const long iy = static_cast<long>(oy * g.stride + ky) - static_cast<long>(g.pad);
            if (iy < 0 || iy >= static_cast<long>(g.h)) continue;
            const double* src = row + (img * g.oh + oy) * g.ow;
            for (std::size_t ox = 0; ox < g.ow; ++ox) {
              const long ix = static_cast<long>(ox * g.stride + kx) - static_cast<long>(g.pad);
              if (ix >= 0 && ix < static_cast<long>(g.w)) plane[iy * static_cast<long>(g.w) + ix] += src[ox];
            }
          }
        }
      }
    }
  }
}

}  // namespace

namespace ad {

Var matmul(Var a, Var b) {
  same_tape(a, b);
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  require_rank(A, 2, "matmul");
  require_rank(B, 2, "matmul");
  if (A.dim(1) != B.dim(0)) {
    throw DimensionError("matmul inner dimensions disagree: " + shape_str(A.shape()) + " x " +
                         shape_str(B.shape()));
  }
  const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
  Tensor C({m, n});
  as_mat(C, m, n).noalias() = as_mat(A, m, k) * as_mat(B, k, n);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(C), {ia, ib}, [ia, ib, m, k, n](Tape& t, std::size_t self) {
    const auto dC = as_mat(t.grad(self), m, n);
    if (Tensor* dA = t.grad_buffer(ia)) as_mat(*dA, m, k).noalias() += dC * as_mat(t.value(ib), k, n).transpose();
    if (Tensor* dB = t.grad_buffer(ib)) as_mat(*dB, k, n).noalias() += as_mat(t.value(ia), m, k).transpose() * dC;
  });
}

Var add_row_bias(Var x, Var bias) {
  same_tape(x, bias);
  const Tensor& X = x.value();
  const Tensor& b = bias.value();
  require_rank(X, 2, "add_row_bias");
  if (b.size() != X.dim(1)) {
    throw DimensionError("bias " + shape_str(b.shape()) + " does not match columns of " + shape_str(X.shape()));
  }
  const std::size_t m = X.dim(0), n = X.dim(1);
  Tensor Y = X;
  as_mat(Y, m, n).rowwise() += as_vec(b).transpose();
  const std::size_t ix = x.id(), ib = bias.id();
  return x.tape()->record(std::move(Y), {ix, ib}, [ix, ib, m, n](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (Tensor* dX = t.grad_buffer(ix)) as_vec(*dX) += as_vec(g);
    if (Tensor* db = t.grad_buffer(ib)) as_vec(*db) += as_mat(g, m, n).colwise().sum().transpose();
  });
}

Var conv2d(Var x, Var kernels, std::size_t stride, std::size_t padding) {
  same_tape(x, kernels);
  const Tensor& X = x.value();
  const Tensor& K = kernels.value();
  require_rank(X, 4, "conv2d input");
  require_rank(K, 4, "conv2d kernels");
  if (stride == 0) throw DimensionError("conv2d stride must be positive");
  if (K.dim(1) != X.dim(1)) {
    throw DimensionError("conv2d channel mismatch: input " + shape_str(X.shape()) + ", kernels " +
                         shape_str(K.shape()));
  }
  ConvGeometry g{X.dim(0), X.dim(1), X.dim(2), X.dim(3), K.dim(0), K.dim(2), K.dim(3), stride, padding, 0, 0};
  if (g.kh > g.h + 2 * padding || g.kw > g.w + 2 * padding) {
    throw DimensionError("conv2d kernel " + shape_str(K.shape()) + " larger than padded input " +
                         shape_str(X.shape()) + " (padding " + std::to_string(padding) + ")");
  }
  g.oh = (g.h + 2 * padding - g.kh) / stride + 1;
  g.ow = (g.w + 2 * padding - g.kw) / stride + 1;

  Tensor col({g.patch(), g.cols()});
  im2col(X, g, col);
  RowMat out = as_mat(K, g.f, g.patch()) * as_mat(col, g.patch(), g.cols());  // f x (n*oh*ow)
  Tensor Y({g.n, g.f, g.oh, g.ow});
  const std::size_t plane = g.oh * g.ow;
  for (std::size_t img = 0; img < g.n; ++img) {
    for (std::size_t fi = 0; fi < g.f; ++fi) {
      std::copy_n(out.data() + fi * g.cols() + img * plane, plane, Y.data() + (img * g.f + fi) * plane);
    }
  }
  const std::size_t ix = x.id(), ik = kernels.id();
  return x.tape()->record(
      std::move(Y), {ix, ik}, [ix, ik, g, col = std::move(col)](Tape& t, std::size_t self) {
        const Tensor& gy = t.grad(self);
        const std::size_t plane = g.oh * g.ow;
        RowMat dout(static_cast<Eigen::Index>(g.f), static_cast<Eigen::Index>(g.cols()));
        for (std::size_t img = 0; img < g.n; ++img) {
          for (std::size_t fi = 0; fi < g.f; ++fi) {
            std::copy_n(gy.data() + (img * g.f + fi) * plane, plane, dout.data() + fi * g.cols() + img * plane);
          }
        }
        if (Tensor* dK = t.grad_buffer(ik)) {
          as_mat(*dK, g.f, g.patch()).noalias() += dout * as_mat(col, g.patch(), g.cols()).transpose();
        }
        if (Tensor* dX = t.grad_buffer(ix)) {
          Tensor dcol({g.patch(), g.cols()});
          as_mat(dcol, g.patch(), g.cols()).noalias() = as_mat(t.value(ik), g.f, g.patch()).transpose() * dout;
          col2im(dcol, g, *dX);
        }
      });
}

Var add_channel_bias(Var x, Var bias) {
  same_tape(x, bias);
  const Tensor& X = x.value();
  const Tensor& b = bias.value();
  require_rank(X, 4, "add_channel_bias");
  if (b.size() != X.dim(1)) {
    throw DimensionError("channel bias " + shape_str(b.shape()) + " does not match " + shape_str(X.shape()));
  }
  const std::size_t n = X.dim(0), c = X.dim(1), plane = X.dim(2) * X.dim(3);
  Tensor Y = X;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* p = Y.data() + (i * c + ch) * plane;
      for (std::size_t k = 0; k < plane; ++k) p[k] += b[ch];
    }
  const std::size_t ix = x.id(), ib = bias.id();
  return x.tape()->record(std::move(Y), {ix, ib}, [ix, ib, n, c, plane](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (Tensor* dX = t.grad_buffer(ix)) as_vec(*dX) += as_vec(g);
    if (Tensor* db = t.grad_buffer(ib)) {
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double* p = g.data() + (i * c + ch) * plane;
          double s = 0.0;
          for (std::size_t k = 0; k < plane; ++k) s += p[k];
          (*db)[ch] += s;
        }
    }
  });
}

Var maxpool2d(Var x, std::size_t size) {
  const Tensor& X = x.value();
  require_rank(X, 4, "maxpool2d");
  if (size == 0 || size > X.dim(2) || size > X.dim(3)) {
    throw DimensionError("pool window " + std::to_string(size) + " does not fit " + shape_str(X.shape()));
  }
  const std::size_t n = X.dim(0), c = X.dim(1), h = X.dim(2), w = X.dim(3);
  const std::size_t oh = h / size, ow = w / size;
  Tensor Y({n, c, oh, ow});
  std::vector<std::size_t> argmax(Y.size());
  for (std::size_t p = 0; p < n * c; ++p) {
    const double* src = X.data() + p * h * w;
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        std::size_t best = (oy * size) * w + ox * size;
        for (std::size_t dy = 0; dy < size; ++dy)
          for (std::size_t dx = 0; dx < size; ++dx) {
            const std::size_t k = (oy * size + dy) * w + ox * size + dx;
            if (src[k] > src[best]) best = k;
          }
        const std::size_t o = (p * oh + oy) * ow + ox;
        Y[o] = src[best];
        argmax[o] = p * h * w + best;
      }
  }
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(Y), {ix}, [ix, argmax = std::move(argmax)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (Tensor* dX = t.grad_buffer(ix))
      for (std::size_t o = 0; o < argmax.size(); ++o) (*dX)[argmax[o]] += g[o];
  });
}

Var relu(Var x) {
  const Tensor& X = x.value();
  Tensor Y = X;
  for (double& v : Y.values()) v = v > 0.0 ? v : 0.0;
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(Y), {ix}, [ix](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& in = t.value(ix);
    if (Tensor* dX = t.grad_buffer(ix))
      for (std::size_t k = 0; k < g.size(); ++k)
        if (in[k] > 0.0) (*dX)[k] += g[k];
  });
}

Var sigmoid(Var x) {
  Tensor Y = mixsemi::sigmoid(x.value());
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(Y), {ix}, [ix](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    if (Tensor* dX = t.grad_buffer(ix))
      for (std::size_t k = 0; k < g.size(); ++k) (*dX)[k] += g[k] * y[k] * (1.0 - y[k]);
  });
}

Var softmax_rows(Var x) {
  require_rank(x.value(), 2, "softmax_rows");
  Tensor Y = mixsemi::softmax_rows(x.value());
  const std::size_t ix = x.id();
  const std::size_t m = Y.dim(0), c = Y.dim(1);
  return x.tape()->record(std::move(Y), {ix}, [ix, m, c](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    const Tensor& y = t.value(self);
    Tensor* dX = t.grad_buffer(ix);
    if (!dX) return;
    for (std::size_t r = 0; r < m; ++r) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += g.at(r, j) * y.at(r, j);
      for (std::size_t j = 0; j < c; ++j) dX->at(r, j) += y.at(r, j) * (g.at(r, j) - dot);
    }
  });
}

Var reshape(Var x, Shape shape) {
  Tensor Y = x.value().reshaped(std::move(shape));
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(Y), {ix}, [ix](Tape& t, std::size_t self) {
    if (Tensor* dX = t.grad_buffer(ix)) as_vec(*dX) += as_vec(t.grad(self));
  });
}

Var gather_rows(Var x, std::vector<std::size_t> idx) {
  Tensor Y = x.value().gather_rows(idx);
  const std::size_t ix = x.id();
  const std::size_t rs = x.value().row_size();
  return x.tape()->record(std::move(Y), {ix}, [ix, rs, idx = std::move(idx)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    if (Tensor* dX = t.grad_buffer(ix))
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t k = 0; k < rs; ++k) (*dX)[idx[i] * rs + k] += g[i * rs + k];
  });
}

Var add(Var a, Var b) {
  same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError("add shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Tensor Y = a.value();
  as_vec(Y) += as_vec(b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(Y), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    if (Tensor* d = t.grad_buffer(ia)) as_vec(*d) += as_vec(t.grad(self));
    if (Tensor* d = t.grad_buffer(ib)) as_vec(*d) += as_vec(t.grad(self));
  });
}

Var mul(Var a, Var b) {
  same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError("mul shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  Tensor Y = a.value();
  as_vec(Y).array() *= as_vec(b.value()).array();
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(Y), {ia, ib}, [ia, ib](Tape& t, std::size_t self) {
    const auto g = as_vec(t.grad(self)).array();
    if (Tensor* d = t.grad_buffer(ia)) as_vec(*d).array() += g * as_vec(t.value(ib)).array();
    if (Tensor* d = t.grad_buffer(ib)) as_vec(*d).array() += g * as_vec(t.value(ia)).array();
  });
}

Var scale(Var x, double s) {
  Tensor Y = x.value();
  as_vec(Y) *= s;
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(Y), {ix}, [ix, s](Tape& t, std::size_t self) {
    if (Tensor* d = t.grad_buffer(ix)) as_vec(*d) += s * as_vec(t.grad(self));
  });
}

Var lerp(double weight, Var a, Var b) {
  same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError("lerp shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const double wb = 1.0 - weight;
  Tensor Y(a.shape());
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  for (std::size_t k = 0; k < Y.size(); ++k) Y[k] = weight * A[k] + wb * B[k];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(Y), {ia, ib}, [ia, ib, weight, wb](Tape& t, std::size_t self) {
    if (Tensor* d = t.grad_buffer(ia)) as_vec(*d) += weight * as_vec(t.grad(self));
    if (Tensor* d = t.grad_buffer(ib)) as_vec(*d) += wb * as_vec(t.grad(self));
  });
}

Var lerp_rows(std::vector<double> weights, Var a, Var b) {
  same_tape(a, b);
  if (a.shape() != b.shape()) {
    throw DimensionError("lerp shape mismatch: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  if (weights.size() != A.rows()) throw DimensionError("lerp_rows needs one weight per row");
  const std::size_t rs = A.row_size();
  Tensor Y(A.shape());
  for (std::size_t r = 0; r < A.rows(); ++r)
    for (std::size_t k = r * rs; k < (r + 1) * rs; ++k) Y[k] = weights[r] * A[k] + (1.0 - weights[r]) * B[k];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape()->record(std::move(Y), {ia, ib}, [ia, ib, rs, w = std::move(weights)](Tape& t, std::size_t self) {
    const Tensor& g = t.grad(self);
    Tensor* da = t.grad_buffer(ia);
    Tensor* db = t.grad_buffer(ib);
    for (std::size_t r = 0; r < w.size(); ++r)
      for (std::size_t k = r * rs; k < (r + 1) * rs; ++k) {
        if (da) (*da)[k] += w[r] * g[k];
        if (db) (*db)[k] += (1.0 - w[r]) * g[k];
      }
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  const std::size_t ix = x.id();
  return x.tape()->record(Tensor::scalar(s), {ix}, [ix](Tape& t, std::size_t self) {
    if (Tensor* d = t.grad_buffer(ix)) as_vec(*d).array() += t.grad(self)[0];
  });
}

}  // namespace ad

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw DimensionError("softmax_rows expects rank 2, got " + shape_str(logits.shape()));
  const std::size_t m = logits.dim(0), c = logits.dim(1);
  Tensor Y(logits.shape());
  for (std::size_t r = 0; r < m; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < c; ++j) mx = std::max(mx, logits.at(r, j));
    double z = 0.0;
    for (std::size_t j = 0; j < c; ++j) z += (Y.at(r, j) = std::exp(logits.at(r, j) - mx));
    for (std::size_t j = 0; j < c; ++j) Y.at(r, j) /= z;
  }
  return Y;
}

Tensor sigmoid(const Tensor& logits) {
  Tensor Y = logits;
  for (double& v : Y.values()) {
    // Branch keeps exp() argument non-positive.
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
  return Y;
}

}  // namespace mixsemi
