#include "tweetnews/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "tweetnews/error.hpp"
#include "tweetnews/numerics/rng.hpp"

namespace tweetnews::numerics {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a.shape()) + " and " +
                   shape_str(b.shape()));
}

[[noreturn]] void shape_fail(const char* op, const Tensor& a, const std::string& why) {
  throw ShapeError(std::string(op) + ": shape " + shape_str(a.shape()) + " " + why);
}

// Input gradient buffer, or nullptr if that input does not need one.
double* input_grad(detail::Node& out, std::size_t i) {
  auto& in = *out.inputs[i];
  if (!in.requires_grad) return nullptr;
  in.ensure_grad();
  return in.grad.data();
}

const std::vector<double>& input_data(const detail::Node& out, std::size_t i) {
  return out.inputs[i]->data;
}

// True when b's shape is a suffix of a's shape.
bool broadcasts_to(const Shape& a, const Shape& b) {
  if (b.size() > a.size()) return false;
  return std::equal(b.rbegin(), b.rend(), a.rbegin());
}

std::size_t last_dim(const Tensor& x) { return x.shape().back(); }

template <typename F, typename DF>
Tensor unary(const Tensor& x, F f, DF df) {
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(in[i]);
  return make_result(x.shape(), std::move(out), {x}, [df](detail::Node& n) {
    double* gx = input_grad(n, 0);
    if (!gx) return;
    const auto& xin = input_data(n, 0);
    for (std::size_t i = 0; i < n.grad.size(); ++i) gx[i] += n.grad[i] * df(xin[i], n.data[i]);
  });
}

double softplus(double s) { return std::max(s, 0.0) + std::log1p(std::exp(-std::abs(s))); }

}  // namespace

Tensor matmul(const Tensor& x, const Tensor& w) {
  if (w.rank() != 2 || x.rank() < 1 || last_dim(x) != w.dim(0)) shape_fail("matmul", x, w);
  const std::size_t k = w.dim(0), n = w.dim(1), rows = x.numel() / k;
  Shape out_shape = x.shape();
  out_shape.back() = n;
  std::vector<double> out(rows * n);
  MutMap(out.data(), rows, n).noalias() =
      ConstMap(x.data().data(), rows, k) * ConstMap(w.data().data(), k, n);
  return make_result(std::move(out_shape), std::move(out), {x, w}, [rows, k, n](detail::Node& node) {
    ConstMap dy(node.grad.data(), rows, n);
    if (double* gx = input_grad(node, 0)) {
      MutMap(gx, rows, k).noalias() += dy * ConstMap(input_data(node, 1).data(), k, n).transpose();
    }
    if (double* gw = input_grad(node, 1)) {
      MutMap(gw, k, n).noalias() += ConstMap(input_data(node, 0).data(), rows, k).transpose() * dy;
    }
  });
}

Tensor bmm(const Tensor& a, const Tensor& b, bool transpose_b) {
  if (a.rank() < 3 || a.rank() != b.rank()) shape_fail("bmm", a, b);
  const std::size_t r = a.rank();
  for (std::size_t i = 0; i + 2 < r; ++i) {
    if (a.dim(i) != b.dim(i)) shape_fail("bmm", a, b);
  }
  const std::size_t m = a.dim(r - 2), k = a.dim(r - 1);
  const std::size_t bk = transpose_b ? b.dim(r - 1) : b.dim(r - 2);
  const std::size_t n = transpose_b ? b.dim(r - 2) : b.dim(r - 1);
  if (bk != k) shape_fail("bmm", a, b);
  const std::size_t batch = a.numel() / (m * k);
  Shape out_shape = a.shape();
  out_shape[r - 1] = n;
  std::vector<double> out(batch * m * n);
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  for (std::size_t i = 0; i < batch; ++i) {
    ConstMap A(pa + i * m * k, m, k);
    MutMap C(out.data() + i * m * n, m, n);
    if (transpose_b) {
      C.noalias() = A * ConstMap(pb + i * n * k, n, k).transpose();
    } else {
      C.noalias() = A * ConstMap(pb + i * k * n, k, n);
    }
  }
  return make_result(std::move(out_shape), std::move(out), {a, b},
                     [batch, m, k, n, transpose_b](detail::Node& node) {
                       double* ga = input_grad(node, 0);
                       double* gb = input_grad(node, 1);
                       const double* da = input_data(node, 0).data();
                       const double* db = input_data(node, 1).data();
                       for (std::size_t i = 0; i < batch; ++i) {
                         ConstMap dy(node.grad.data() + i * m * n, m, n);
                         ConstMap A(da + i * m * k, m, k);
                         if (transpose_b) {
                           ConstMap B(db + i * n * k, n, k);
                           if (ga) MutMap(ga + i * m * k, m, k).noalias() += dy * B;
                           if (gb) MutMap(gb + i * n * k, n, k).noalias() += dy.transpose() * A;
                         } else {
                           ConstMap B(db + i * k * n, k, n);
                           if (ga) MutMap(ga + i * m * k, m, k).noalias() += dy * B.transpose();
                           if (gb) MutMap(gb + i * k * n, k, n).noalias() += A.transpose() * dy;
                         }
                       }
                     });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!broadcasts_to(a.shape(), b.shape())) shape_fail("add", a, b);
  const std::size_t nb = b.numel();
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto pb = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += pb[i % nb];
  return make_result(a.shape(), std::move(out), {a, b}, [nb](detail::Node& n) {
    if (double* ga = input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
    }
    if (double* gb = input_grad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) gb[i % nb] += n.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (!broadcasts_to(a.shape(), b.shape())) shape_fail("sub", a, b);
  const std::size_t nb = b.numel();
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto pb = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= pb[i % nb];
  return make_result(a.shape(), std::move(out), {a, b}, [nb](detail::Node& n) {
    if (double* ga = input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i];
    }
    if (double* gb = input_grad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) gb[i % nb] -= n.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (!broadcasts_to(a.shape(), b.shape())) shape_fail("mul", a, b);
  const std::size_t nb = b.numel();
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto pb = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= pb[i % nb];
  return make_result(a.shape(), std::move(out), {a, b}, [nb](detail::Node& n) {
    const auto& va = input_data(n, 0);
    const auto& vb = input_data(n, 1);
    if (double* ga = input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) ga[i] += n.grad[i] * vb[i % nb];
    }
    if (double* gb = input_grad(n, 1)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) gb[i % nb] += n.grad[i] * va[i];
    }
  });
}

Tensor scale(const Tensor& x, double factor) { return affine(x, factor, 0.0); }

Tensor affine(const Tensor& x, double factor, double shift) {
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * in[i] + shift;
  return make_result(x.shape(), std::move(out), {x}, [factor](detail::Node& n) {
    if (double* gx = input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) gx[i] += factor * n.grad[i];
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) shape_fail("concat", parts.front(), "has no axis " + std::to_string(axis));
  std::size_t outer = 1, inner = 1, total = 0;
  for (std::size_t i = 0; i < axis; ++i) outer *= first[i];
  for (std::size_t i = axis + 1; i < first.size(); ++i) inner *= first[i];
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) ok = (i == axis) || s[i] == first[i];
    if (!ok) shape_fail("concat", parts.front(), p);
    extents.push_back(s[axis]);
    total += s[axis];
  }
  Shape out_shape = first;
  out_shape[axis] = total;
  std::vector<double> out(outer * total * inner);
  std::size_t offset = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto src = parts[p].data();
    const std::size_t block = extents[p] * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(src.data() + o * block, block, out.data() + o * total * inner + offset);
    }
    offset += block;
  }
  return make_result(std::move(out_shape), std::move(out), parts,
                     [extents, outer, inner, total](detail::Node& n) {
                       std::size_t off = 0;
                       for (std::size_t p = 0; p < extents.size(); ++p) {
                         const std::size_t block = extents[p] * inner;
                         if (double* g = input_grad(n, p)) {
                           for (std::size_t o = 0; o < outer; ++o) {
                             const double* src = n.grad.data() + o * total * inner + off;
                             for (std::size_t j = 0; j < block; ++j) g[o * block + j] += src[j];
                           }
                         }
                         off += block;
                       }
                     });
}

Tensor embedding(const Tensor& table, std::span<const std::int32_t> ids, const Shape& ids_shape) {
  if (table.rank() != 2) shape_fail("embedding", table, "is not a [V, d] table");
  if (shape_numel(ids_shape) != ids.size()) {
    throw ShapeError("embedding: ids shape " + shape_str(ids_shape) + " does not match " +
                     std::to_string(ids.size()) + " ids");
  }
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<double> out(ids.size() * d);
  const auto src = table.data();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab) {
      throw DataError("embedding: id " + std::to_string(ids[i]) + " outside table of " +
                      std::to_string(vocab) + " rows");
    }
    std::copy_n(src.data() + ids[i] * d, d, out.data() + i * d);
  }
  Shape out_shape = ids_shape;
  out_shape.push_back(d);
  std::vector<std::int32_t> idv(ids.begin(), ids.end());
  return make_result(std::move(out_shape), std::move(out), {table}, [idv, d](detail::Node& n) {
    double* g = input_grad(n, 0);
    if (!g) return;
    for (std::size_t i = 0; i < idv.size(); ++i) {
      for (std::size_t j = 0; j < d; ++j) g[idv[i] * d + j] += n.grad[i * d + j];
    }
  });
}

namespace {

Tensor softmax_impl(const Tensor& x, std::span<const std::uint8_t> keep) {
  if (x.rank() < 1) shape_fail("softmax", x, "has no last axis");
  const std::size_t cols = last_dim(x), rows = x.numel() / cols;
  std::vector<double> out(x.numel(), 0.0);
  const auto in = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * cols;
    double* o = out.data() + r * cols;
    double mx = -INFINITY;
    for (std::size_t c = 0; c < cols; ++c) {
      if (keep.empty() || keep[r * cols + c]) mx = std::max(mx, row[c]);
    }
    if (mx == -INFINITY) continue;
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (keep.empty() || keep[r * cols + c]) {
        o[c] = std::exp(row[c] - mx);
        total += o[c];
      }
    }
    for (std::size_t c = 0; c < cols; ++c) o[c] /= total;
  }
  return make_result(x.shape(), std::move(out), {x}, [rows, cols](detail::Node& n) {
    double* gx = input_grad(n, 0);
    if (!gx) return;
    for (std::size_t r = 0; r < rows; ++r) {
      const double* y = n.data.data() + r * cols;
      const double* dy = n.grad.data() + r * cols;
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += dy[c] * y[c];
      for (std::size_t c = 0; c < cols; ++c) gx[r * cols + c] += y[c] * (dy[c] - dot);
    }
  });
}

}  // namespace

Tensor softmax(const Tensor& x) { return softmax_impl(x, {}); }

Tensor masked_softmax(const Tensor& x, std::span<const std::uint8_t> keep) {
  if (keep.size() != x.numel()) {
    shape_fail("masked_softmax", x, "does not match mask of " + std::to_string(keep.size()));
  }
  return softmax_impl(x, keep);
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  if (x.rank() < 1) shape_fail("layer_norm", x, "has no last axis");
  const std::size_t d = last_dim(x), rows = x.numel() / d;
  if (gain.numel() != d || bias.numel() != d) shape_fail("layer_norm", x, gain);
  std::vector<double> out(x.numel()), xhat(x.numel()), rstd(rows);
  const auto in = x.data();
  const auto g = gain.data();
  const auto b = bias.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * d;
    double mu = 0.0;
    for (std::size_t c = 0; c < d; ++c) mu += row[c];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (row[c] - mu) * (row[c] - mu);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) {
      xhat[r * d + c] = (row[c] - mu) * rstd[r];
      out[r * d + c] = xhat[r * d + c] * g[c] + b[c];
    }
  }
  return make_result(
      x.shape(), std::move(out), {x, gain, bias},
      [xhat = std::move(xhat), rstd = std::move(rstd), rows, d](detail::Node& n) {
        double* gx = input_grad(n, 0);
        double* gg = input_grad(n, 1);
        double* gb = input_grad(n, 2);
        const auto& gain_v = input_data(n, 1);
        std::vector<double> dxhat(d);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* dy = n.grad.data() + r * d;
          const double* xh = xhat.data() + r * d;
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (std::size_t c = 0; c < d; ++c) {
            if (gg) gg[c] += dy[c] * xh[c];
            if (gb) gb[c] += dy[c];
            dxhat[c] = dy[c] * gain_v[c];
            mean_dxhat += dxhat[c];
            mean_dxhat_xhat += dxhat[c] * xh[c];
          }
          if (!gx) continue;
          mean_dxhat /= static_cast<double>(d);
          mean_dxhat_xhat /= static_cast<double>(d);
          for (std::size_t c = 0; c < d; ++c) {
            gx[r * d + c] += rstd[r] * (dxhat[c] - mean_dxhat - xh[c] * mean_dxhat_xhat);
          }
        }
      });
}

Tensor gelu(const Tensor& x) {
  return unary(
      x, [](double v) { return 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2)); },
      [](double v, double) {
        const double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
        const double pdf = std::exp(-0.5 * v * v) / std::sqrt(2.0 * M_PI);
        return cdf + v * pdf;
      });
}

Tensor sigmoid(const Tensor& x) {
  return unary(
      x,
      [](double v) {
        if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::int32_t> targets,
                     std::span<const std::uint8_t> mask) {
  if (logits.rank() < 1) shape_fail("cross_entropy", logits, "has no class axis");
  const std::size_t classes = last_dim(logits), rows = logits.numel() / classes;
  if (targets.size() != rows || mask.size() != rows) {
    shape_fail("cross_entropy", logits,
               "does not match " + std::to_string(targets.size()) + " targets / " +
                   std::to_string(mask.size()) + " mask entries");
  }
  const auto in = logits.data();
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= classes) {
      throw DataError("cross_entropy: target " + std::to_string(targets[r]) + " outside " +
                      std::to_string(classes) + " classes");
    }
    const double* row = in.data() + r * classes;
    const double mx = *std::max_element(row, row + classes);
    double z = 0.0;
    for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
    total += mx + std::log(z) - row[targets[r]];
    ++count;
  }
  if (count == 0) throw DataError("cross_entropy: mask selects no positions");
  std::vector<std::int32_t> tv(targets.begin(), targets.end());
  std::vector<std::uint8_t> mv(mask.begin(), mask.end());
  return make_result({1}, {total / static_cast<double>(count)}, {logits},
                     [tv = std::move(tv), mv = std::move(mv), rows, classes, count](detail::Node& n) {
                       double* g = input_grad(n, 0);
                       if (!g) return;
                       const auto& lv = input_data(n, 0);
                       const double up = n.grad[0] / static_cast<double>(count);
                       for (std::size_t r = 0; r < rows; ++r) {
                         if (!mv[r]) continue;
                         const double* row = lv.data() + r * classes;
                         const double mx = *std::max_element(row, row + classes);
                         double z = 0.0;
                         for (std::size_t c = 0; c < classes; ++c) z += std::exp(row[c] - mx);
                         for (std::size_t c = 0; c < classes; ++c) {
                           const double p = std::exp(row[c] - mx) / z;
                           g[r * classes + c] += up * (p - (static_cast<std::int32_t>(c) == tv[r] ? 1.0 : 0.0));
                         }
                       }
                     });
}

Tensor bce_with_logits(const Tensor& logits, std::span<const double> targets) {
  if (targets.size() != logits.numel()) {
    shape_fail("bce_with_logits", logits, "does not match " + std::to_string(targets.size()) + " targets");
  }
  const auto s = logits.data();
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += targets[i] * softplus(-s[i]) + (1.0 - targets[i]) * softplus(s[i]);
  }
  const double count = static_cast<double>(s.size());
  std::vector<double> tv(targets.begin(), targets.end());
  return make_result({1}, {total / count}, {logits}, [tv = std::move(tv), count](detail::Node& n) {
    double* g = input_grad(n, 0);
    if (!g) return;
    const auto& sv = input_data(n, 0);
    for (std::size_t i = 0; i < sv.size(); ++i) {
      const double p = sv[i] >= 0 ? 1.0 / (1.0 + std::exp(-sv[i]))
                                  : std::exp(sv[i]) / (1.0 + std::exp(sv[i]));
      g[i] += n.grad[0] * (p - tv[i]) / count;
    }
  });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return make_result({1}, {total}, {x}, [](detail::Node& n) {
    if (double* g = input_grad(n, 0)) {
      const std::size_t len = n.inputs[0]->data.size();
      for (std::size_t i = 0; i < len; ++i) g[i] += n.grad[0];
    }
  });
}

Tensor mean(const Tensor& x) { return scale(sum(x), 1.0 / static_cast<double>(x.numel())); }

Tensor reshape(const Tensor& x, Shape shape) {
  if (shape_numel(shape) != x.numel()) {
    shape_fail("reshape", x, "cannot become " + shape_str(shape));
  }
  std::vector<double> out(x.data().begin(), x.data().end());
  return make_result(std::move(shape), std::move(out), {x}, [](detail::Node& n) {
    if (double* g = input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i];
    }
  });
}

Tensor swap_axes12(const Tensor& x) {
  if (x.rank() != 4) shape_fail("swap_axes12", x, "is not rank 4");
  const std::size_t a = x.dim(0), b = x.dim(1), c = x.dim(2), d = x.dim(3);
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j)
      for (std::size_t k = 0; k < c; ++k)
        std::copy_n(in.data() + ((i * b + j) * c + k) * d, d, out.data() + ((i * c + k) * b + j) * d);
  return make_result({a, c, b, d}, std::move(out), {x}, [a, b, c, d](detail::Node& n) {
    double* g = input_grad(n, 0);
    if (!g) return;
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j)
        for (std::size_t k = 0; k < c; ++k) {
          const double* src = n.grad.data() + ((i * c + k) * b + j) * d;
          double* dst = g + ((i * b + j) * c + k) * d;
          for (std::size_t e = 0; e < d; ++e) dst[e] += src[e];
        }
  });
}

Tensor take_rows(const Tensor& x, std::span<const std::size_t> rows) {
  if (x.rank() < 1) shape_fail("take_rows", x, "has no rows");
  const std::size_t width = last_dim(x), n_rows = x.numel() / width;
  if (rows.empty()) shape_fail("take_rows", x, "asked for zero rows");
  std::vector<double> out(rows.size() * width);
  const auto in = x.data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n_rows) {
      shape_fail("take_rows", x, "has no row " + std::to_string(rows[i]));
    }
    std::copy_n(in.data() + rows[i] * width, width, out.data() + i * width);
  }
  std::vector<std::size_t> rv(rows.begin(), rows.end());
  return make_result({rows.size(), width}, std::move(out), {x}, [rv = std::move(rv), width](detail::Node& n) {
    double* g = input_grad(n, 0);
    if (!g) return;
    for (std::size_t i = 0; i < rv.size(); ++i) {
      for (std::size_t j = 0; j < width; ++j) g[rv[i] * width + j] += n.grad[i * width + j];
    }
  });
}

Tensor dropout(const Tensor& x, double p, std::uint64_t seed) {
  if (p <= 0.0) return x;
  if (p >= 1.0) throw ConfigError("dropout probability must be < 1");
  Rng rng(seed);
  std::vector<double> keep(x.numel());
  const double s = 1.0 / (1.0 - p);
  for (auto& k : keep) k = rng.bernoulli(p) ? 0.0 : s;
  std::vector<double> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = in[i] * keep[i];
  return make_result(x.shape(), std::move(out), {x}, [keep = std::move(keep)](detail::Node& n) {
    if (double* g = input_grad(n, 0)) {
      for (std::size_t i = 0; i < n.grad.size(); ++i) g[i] += n.grad[i] * keep[i];
    }
  });
}

}  // namespace tweetnews::numerics
