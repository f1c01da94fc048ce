#include "recnet/ops.hpp"

#include <algorithm>
#include <cmath>

namespace recnet::ad {

namespace {

// Gradient buffer of parent `i`, or nullptr when that parent is constant.
std::vector<double>* parent_grad(Node& out, std::size_t i) {
  auto& p = out.parents[i];
  return p->requires_grad ? &p->grad_buffer() : nullptr;
}

const std::vector<double>& parent_values(const Node& out, std::size_t i) {
  return out.parents[i]->values;
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(t.shape()));
  }
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

template <typename Fwd, typename Deriv>
Tensor unary(const Tensor& x, Fwd fwd, Deriv deriv_from_output) {
  std::vector<double> out(x.size());
  auto xv = x.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xv[i]);
  return make_result(x.shape(), std::move(out), {x}, [deriv_from_output](Node& n) {
    auto* gx = parent_grad(n, 0);
    if (!gx) return;
    const auto& g = *n.grad;
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] * deriv_from_output(n.values[i]);
  });
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner extents differ, " + shape_string(a.shape()) + " * " +
                         shape_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      const double* brow = &bv[p * n];
      double* orow = &out[i * n];
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return make_result({m, n}, std::move(out), {a, b}, [m, k, n](Node& node) {
    const auto& g = *node.grad;
    if (auto* ga = parent_grad(node, 0)) {
      const auto& bv = parent_values(node, 1);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += g[i * n + j] * bv[p * n + j];
          (*ga)[i * k + p] += s;
        }
    }
    if (auto* gb = parent_grad(node, 1)) {
      const auto& av = parent_values(node, 0);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = av[i * k + p];
          for (std::size_t j = 0; j < n; ++j) (*gb)[p * n + j] += aip * g[i * n + j];
        }
    }
  });
}

Tensor matvec(const Tensor& a, const Tensor& x) {
  require_rank(a, 2, "matvec");
  require_rank(x, 1, "matvec");
  const std::size_t m = a.rows(), k = a.cols();
  if (x.size() != k) {
    throw DimensionError("matvec: inner extents differ, " + shape_string(a.shape()) + " * " +
                         shape_string(x.shape()));
  }
  std::vector<double> out(m, 0.0);
  auto av = a.values();
  auto xv = x.values();
  for (std::size_t i = 0; i < m; ++i) {
    double s = 0.0;
    const double* arow = &av[i * k];
    for (std::size_t p = 0; p < k; ++p) s += arow[p] * xv[p];
    out[i] = s;
  }
  return make_result({m}, std::move(out), {a, x}, [m, k](Node& node) {
    const auto& g = *node.grad;
    if (auto* ga = parent_grad(node, 0)) {
      const auto& xv = parent_values(node, 1);
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        double* grow = &(*ga)[i * k];
        for (std::size_t p = 0; p < k; ++p) grow[p] += gi * xv[p];
      }
    }
    if (auto* gx = parent_grad(node, 1)) {
      const auto& av = parent_values(node, 0);
      for (std::size_t i = 0; i < m; ++i) {
        const double gi = g[i];
        const double* arow = &av[i * k];
        for (std::size_t p = 0; p < k; ++p) (*gx)[p] += gi * arow[p];
      }
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  const std::size_t r = a.rows(), c = a.cols();
  std::vector<double> out(r * c);
  auto av = a.values();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  return make_result({c, r}, std::move(out), {a}, [r, c](Node& node) {
    auto* ga = parent_grad(node, 0);
    if (!ga) return;
    const auto& g = *node.grad;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) (*ga)[i * c + j] += g[j * r + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& node) {
    const auto& g = *node.grad;
    for (std::size_t p = 0; p < 2; ++p)
      if (auto* gp = parent_grad(node, p))
        for (std::size_t i = 0; i < g.size(); ++i) (*gp)[i] += g[i];
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& node) {
    const auto& g = *node.grad;
    if (auto* ga = parent_grad(node, 0))
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
    if (auto* gb = parent_grad(node, 1))
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
  });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same(a, b, "hadamard");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& node) {
    const auto& g = *node.grad;
    if (auto* ga = parent_grad(node, 0)) {
      const auto& bv = parent_values(node, 1);
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    }
    if (auto* gb = parent_grad(node, 1)) {
      const auto& av = parent_values(node, 0);
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * s;
  return make_result(a.shape(), std::move(out), {a}, [s](Node& node) {
    auto* ga = parent_grad(node, 0);
    if (!ga) return;
    const auto& g = *node.grad;
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * s;
  });
}

Tensor add_n(std::span<const Tensor> xs) {
  if (xs.empty()) throw DimensionError("add_n: empty operand list");
  std::vector<double> out(xs[0].values().begin(), xs[0].values().end());
  for (std::size_t t = 1; t < xs.size(); ++t) {
    require_same(xs[0], xs[t], "add_n");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += xs[t][i];
  }
  return make_result(xs[0].shape(), std::move(out), xs, [](Node& node) {
    const auto& g = *node.grad;
    for (std::size_t p = 0; p < node.parents.size(); ++p)
      if (auto* gp = parent_grad(node, p))
        for (std::size_t i = 0; i < g.size(); ++i) (*gp)[i] += g[i];
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
      [](double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& x) {
  return unary(x, [](double v) { return std::tanh(v); }, [](double y) { return 1.0 - y * y; });
}

Tensor softmax(const Tensor& x) {
  require_rank(x, 1, "softmax");
  auto xv = x.values();
  const double mx = *std::max_element(xv.begin(), xv.end());
  std::vector<double> out(x.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(xv[i] - mx);
    total += out[i];
  }
  for (auto& v : out) v /= total;
  return make_result(x.shape(), std::move(out), {x}, [](Node& node) {
    auto* gx = parent_grad(node, 0);
    if (!gx) return;
    const auto& g = *node.grad;
    const auto& y = node.values;
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
    for (std::size_t i = 0; i < y.size(); ++i) (*gx)[i] += y[i] * (g[i] - dot);
  });
}

Tensor log_softmax(const Tensor& x) {
  require_rank(x, 1, "log_softmax");
  auto xv = x.values();
  const double mx = *std::max_element(xv.begin(), xv.end());
  double total = 0.0;
  for (double v : xv) total += std::exp(v - mx);
  const double lse = mx + std::log(total);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] - lse;
  return make_result(x.shape(), std::move(out), {x}, [](Node& node) {
    auto* gx = parent_grad(node, 0);
    if (!gx) return;
    const auto& g = *node.grad;
    double gsum = 0.0;
    for (double v : g) gsum += v;
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[i] += g[i] - std::exp(node.values[i]) * gsum;
  });
}

Tensor pick(const Tensor& x, std::size_t index) {
  require_rank(x, 1, "pick");
  if (index >= x.size()) {
    throw DimensionError("pick: index " + std::to_string(index) + " outside " +
                         shape_string(x.shape()));
  }
  return make_result({1}, {x[index]}, {x}, [index](Node& node) {
    if (auto* gx = parent_grad(node, 0)) (*gx)[index] += (*node.grad)[0];
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make_result({1}, {s}, {x}, [](Node& node) {
    auto* gx = parent_grad(node, 0);
    if (!gx) return;
    const double g = (*node.grad)[0];
    for (auto& v : *gx) v += g;
  });
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat: empty operand list");
  std::vector<double> out;
  std::vector<std::size_t> offsets;
  for (const auto& p : parts) {
    require_rank(p, 1, "concat");
    offsets.push_back(out.size());
    out.insert(out.end(), p.values().begin(), p.values().end());
  }
  Shape s{out.size()};
  return make_result(std::move(s), std::move(out), parts, [offsets](Node& node) {
    const auto& g = *node.grad;
    for (std::size_t p = 0; p < node.parents.size(); ++p) {
      auto* gp = parent_grad(node, p);
      if (!gp) continue;
      for (std::size_t i = 0; i < gp->size(); ++i) (*gp)[i] += g[offsets[p] + i];
    }
  });
}

Tensor slice(const Tensor& x, std::size_t offset, std::size_t length) {
  require_rank(x, 1, "slice");
  if (length == 0 || offset + length > x.size()) {
    throw DimensionError("slice: range [" + std::to_string(offset) + ", " +
                         std::to_string(offset + length) + ") outside " + shape_string(x.shape()));
  }
  std::vector<double> out(x.values().begin() + static_cast<std::ptrdiff_t>(offset),
                          x.values().begin() + static_cast<std::ptrdiff_t>(offset + length));
  return make_result({length}, std::move(out), {x}, [offset](Node& node) {
    auto* gx = parent_grad(node, 0);
    if (!gx) return;
    const auto& g = *node.grad;
    for (std::size_t i = 0; i < g.size(); ++i) (*gx)[offset + i] += g[i];
  });
}

Tensor row(const Tensor& m, std::size_t r) {
  require_rank(m, 2, "row");
  if (r >= m.rows()) {
    throw DimensionError("row: index " + std::to_string(r) + " outside " + shape_string(m.shape()));
  }
  const std::size_t c = m.cols();
  std::vector<double> out(m.values().begin() + static_cast<std::ptrdiff_t>(r * c),
                          m.values().begin() + static_cast<std::ptrdiff_t>((r + 1) * c));
  return make_result({c}, std::move(out), {m}, [r, c](Node& node) {
    auto* gm = parent_grad(node, 0);
    if (!gm) return;
    const auto& g = *node.grad;
    for (std::size_t j = 0; j < c; ++j) (*gm)[r * c + j] += g[j];
  });
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw DimensionError("stack_rows: empty operand list");
  const std::size_t d = rows[0].size();
  std::vector<double> out;
  out.reserve(rows.size() * d);
  for (const auto& r : rows) {
    require_rank(r, 1, "stack_rows");
    require_same(rows[0], r, "stack_rows");
    out.insert(out.end(), r.values().begin(), r.values().end());
  }
  return make_result({rows.size(), d}, std::move(out), rows, [d](Node& node) {
    const auto& g = *node.grad;
    for (std::size_t p = 0; p < node.parents.size(); ++p)
      if (auto* gp = parent_grad(node, p))
        for (std::size_t j = 0; j < d; ++j) (*gp)[j] += g[p * d + j];
  });
}

Tensor add_row_broadcast(const Tensor& m, const Tensor& v) {
  require_rank(m, 2, "add_row_broadcast");
  require_rank(v, 1, "add_row_broadcast");
  const std::size_t r = m.rows(), c = m.cols();
  if (v.size() != c) {
    throw DimensionError("add_row_broadcast: " + shape_string(m.shape()) + " + " +
                         shape_string(v.shape()));
  }
  std::vector<double> out(m.values().begin(), m.values().end());
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += v[j];
  return make_result(m.shape(), std::move(out), {m, v}, [r, c](Node& node) {
    const auto& g = *node.grad;
    if (auto* gm = parent_grad(node, 0))
      for (std::size_t i = 0; i < g.size(); ++i) (*gm)[i] += g[i];
    if (auto* gv = parent_grad(node, 1))
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) (*gv)[j] += g[i * c + j];
  });
}

Tensor mean_pool(std::span<const Tensor> xs) {
  if (xs.empty()) throw DimensionError("mean_pool: empty sequence");
  const std::size_t d = xs[0].size();
  std::vector<double> out(d, 0.0);
  for (const auto& x : xs) {
    require_rank(x, 1, "mean_pool");
    require_same(xs[0], x, "mean_pool");
    for (std::size_t j = 0; j < d; ++j) out[j] += x[j];
  }
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (auto& v : out) v *= inv;
  return make_result({d}, std::move(out), xs, [inv](Node& node) {
    const auto& g = *node.grad;
    for (std::size_t p = 0; p < node.parents.size(); ++p)
      if (auto* gp = parent_grad(node, p))
        for (std::size_t j = 0; j < g.size(); ++j) (*gp)[j] += g[j] * inv;
  });
}

Tensor sq_euclidean(const Tensor& a, const Tensor& b) {
  require_rank(a, 1, "sq_euclidean");
  require_same(a, b, "sq_euclidean");
  const double inv_d = 1.0 / static_cast<double>(a.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    s += diff * diff;
  }
  return make_result({1}, {s * inv_d}, {a, b}, [inv_d](Node& node) {
    const double g = (*node.grad)[0];
    const auto& av = parent_values(node, 0);
    const auto& bv = parent_values(node, 1);
    auto* ga = parent_grad(node, 0);
    auto* gb = parent_grad(node, 1);
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double d = 2.0 * (av[i] - bv[i]) * inv_d * g;
      if (ga) (*ga)[i] += d;
      if (gb) (*gb)[i] -= d;
    }
  });
}

}  // namespace recnet::ad
