// SPDX-License-Identifier: Apache-2.0
#include "morphkit/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace morphkit::ad {

std::string shape_str(const Shape &s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i)
    os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape &s) {
  return std::accumulate(s.begin(), s.end(), std::size_t{1},
                         std::multiplies<>());
}

namespace {

[[noreturn]] void shape_fail(const char *op, const Shape &a, const Shape &b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) +
                   " and " + shape_str(b));
}

[[noreturn]] void shape_fail(const char *op, const Shape &a,
                             const std::string &why) {
  throw ShapeError(std::string(op) + ": shape " + shape_str(a) + " " + why);
}

// outer x n x inner view of a tensor around one axis
struct AxisView {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisView axis_view(const Shape &s, std::size_t axis) {
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i)
    v.outer *= s[i];
  v.n = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i)
    v.inner *= s[i];
  return v;
}

Shape drop_axis(const Shape &s, std::size_t axis) {
  Shape out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i != axis)
      out.push_back(s[i]);
  return out;
}

void check_axis(const char *op, const Shape &s, std::size_t axis) {
  if (axis >= s.size())
    shape_fail(op, s, "has no axis " + std::to_string(axis));
}

// Elementwise op helper: fwd(x) -> y, dydx(x, y) -> derivative.
template <class Fwd, class Deriv> Var elementwise(Var a, Fwd fwd, Deriv deriv) {
  const Tensor &x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i)
    y[i] = fwd(x[i]);
  const std::size_t ai = a.index;
  return a.tape->record(std::move(y), {a}, [ai, deriv](Tape &t, std::size_t self) {
    const Tensor &x = t.node(ai).value;
    const Tensor &y = t.node(self).value;
    const Tensor &g = t.node(self).grad;
    Tensor &ga = t.grad_of(ai);
    for (std::size_t i = 0; i < x.numel(); ++i)
      ga[i] += g[i] * deriv(x[i], y[i]);
  });
}

} // namespace

// ---------------------------------------------------------------- Tensor

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_numel(shape_))
    throw ShapeError("tensor: data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str(shape_));
}

double Tensor::item() const {
  if (data_.size() != 1)
    throw ShapeError("item: tensor of shape " + shape_str(shape_) +
                     " is not a scalar");
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::reshape(Shape s) {
  if (shape_numel(s) != data_.size())
    shape_fail("reshape", shape_, "cannot become " + shape_str(s));
  shape_ = std::move(s);
}

// ------------------------------------------------------------ ParamStore

Parameter &ParamStore::add(std::string name, std::string group, Tensor init) {
  if (contains(name))
    throw std::invalid_argument("duplicate parameter name: " + name);
  params_.push_back(std::make_unique<Parameter>(std::move(name), std::move(group),
                                                std::move(init)));
  return *params_.back();
}

Parameter &ParamStore::get(const std::string &name) {
  for (auto &p : params_)
    if (p->name == name)
      return *p;
  throw std::out_of_range("no parameter named " + name);
}

const Parameter &ParamStore::get(const std::string &name) const {
  for (const auto &p : params_)
    if (p->name == name)
      return *p;
  throw std::out_of_range("no parameter named " + name);
}

bool ParamStore::contains(const std::string &name) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const auto &p) { return p->name == name; });
}

std::vector<Parameter *> ParamStore::all() {
  std::vector<Parameter *> out;
  for (auto &p : params_)
    out.push_back(p.get());
  return out;
}

std::vector<const Parameter *> ParamStore::all() const {
  std::vector<const Parameter *> out;
  for (const auto &p : params_)
    out.push_back(p.get());
  return out;
}

std::vector<Parameter *> ParamStore::group(const std::string &group) {
  std::vector<Parameter *> out;
  for (auto &p : params_)
    if (p->group == group)
      out.push_back(p.get());
  return out;
}

void ParamStore::zero_grad() {
  for (auto &p : params_)
    p->zero_grad();
}

// ------------------------------------------------------------------ Tape

const Tensor &Var::value() const { return tape->node(index).value; }
const Tensor &Var::grad() const { return tape->node(index).grad; }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, nullptr, {}});
  return Var{this, nodes_.size() - 1};
}

Var Tape::param(Parameter &p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end())
    return Var{this, it->second};
  nodes_.push_back(Node{p.value, {}, true, &p, {}});
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var{this, nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                std::move(fn));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn fn) {
  bool rg = false;
  for (const Var &v : inputs) {
    if (v.tape != this)
      throw std::invalid_argument("tape: operand recorded on a different tape");
    rg = rg || nodes_[v.index].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), {}, rg, nullptr,
                        rg ? std::move(fn) : BackwardFn{}});
  return Var{this, nodes_.size() - 1};
}

Tensor &Tape::grad_of(std::size_t i) {
  Node &n = nodes_[i];
  if (n.grad.numel() != n.value.numel() || n.grad.shape() != n.value.shape())
    n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.tape != this)
    throw std::invalid_argument("backward: loss belongs to another tape");
  if (loss.value().numel() != 1)
    throw ShapeError("backward: loss must be a scalar, got shape " +
                     shape_str(loss.shape()));
  for (auto &n : nodes_)
    n.grad = Tensor();
  grad_of(loss.index).fill(1.0);
  for (std::size_t i = loss.index + 1; i-- > 0;) {
    Node &n = nodes_[i];
    if (!n.requires_grad || n.grad.numel() == 0)
      continue;
    if (n.backward)
      n.backward(*this, i);
    Node &m = nodes_[i];
    if (m.param) {
      Tensor &pg = m.param->grad;
      for (std::size_t k = 0; k < pg.numel(); ++k)
        pg[k] += m.grad[k];
    }
  }
}

// ------------------------------------------------------------ primitives

Var matmul(Var a, Var b) {
  const Tensor &A = a.value();
  const Tensor &B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0))
    shape_fail("matmul", A.shape(), B.shape());
  const std::size_t m = A.dim(0), k = A.dim(1), n = B.dim(1);
  Tensor C(Shape{m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0)
        continue;
      const double *brow = &B.data()[p * n];
      double *crow = &C.data()[i * n];
      for (std::size_t j = 0; j < n; ++j)
        crow[j] += aip * brow[j];
    }
  const std::size_t ai = a.index, bi = b.index;
  return a.tape->record(std::move(C), {a, b}, [ai, bi, m, k, n](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    if (t.needs_grad(ai)) {
      const Tensor &B = t.node(bi).value;
      Tensor &GA = t.grad_of(ai);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const double g = G[i * n + j];
          if (g == 0.0)
            continue;
          for (std::size_t p = 0; p < k; ++p)
            GA[i * k + p] += g * B[p * n + j];
        }
    }
    if (t.needs_grad(bi)) {
      const Tensor &A = t.node(ai).value;
      Tensor &GB = t.grad_of(bi);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = A[i * k + p];
          if (aip == 0.0)
            continue;
          for (std::size_t j = 0; j < n; ++j)
            GB[p * n + j] += aip * G[i * n + j];
        }
    }
  });
}

Var transpose(Var a) {
  const Tensor &A = a.value();
  if (A.rank() != 2)
    shape_fail("transpose", A.shape(), "is not a matrix");
  const std::size_t m = A.dim(0), n = A.dim(1);
  Tensor T(Shape{n, m});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      T[j * m + i] = A[i * n + j];
  const std::size_t ai = a.index;
  return a.tape->record(std::move(T), {a}, [ai, m, n](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    Tensor &GA = t.grad_of(ai);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        GA[i * n + j] += G[j * m + i];
  });
}

namespace {

// b broadcasts over a when shapes match or b holds exactly the trailing axis.
bool trailing_broadcast(const Shape &a, const Shape &b) {
  if (a == b)
    return false;
  if (a.empty() || shape_numel(b) != a.back())
    return false;
  return b.size() == 1 || (b.size() == 2 && b[0] == 1);
}

Var add_scaled(const char *op, Var a, Var b, double kb) {
  const Tensor &A = a.value();
  const Tensor &B = b.value();
  const bool bc = trailing_broadcast(A.shape(), B.shape());
  if (!bc && A.shape() != B.shape())
    shape_fail(op, A.shape(), B.shape());
  Tensor C = A;
  const std::size_t w = B.numel();
  for (std::size_t i = 0; i < C.numel(); ++i)
    C[i] += kb * B[bc ? i % w : i];
  const std::size_t ai = a.index, bi = b.index;
  return a.tape->record(std::move(C), {a, b}, [ai, bi, bc, w, kb](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    if (t.needs_grad(ai)) {
      Tensor &GA = t.grad_of(ai);
      for (std::size_t i = 0; i < G.numel(); ++i)
        GA[i] += G[i];
    }
    if (t.needs_grad(bi)) {
      Tensor &GB = t.grad_of(bi);
      for (std::size_t i = 0; i < G.numel(); ++i)
        GB[bc ? i % w : i] += kb * G[i];
    }
  });
}

} // namespace

Var add(Var a, Var b) { return add_scaled("add", a, b, 1.0); }
Var sub(Var a, Var b) { return add_scaled("sub", a, b, -1.0); }

Var mul(Var a, Var b) {
  const Tensor &A = a.value();
  const Tensor &B = b.value();
  const bool sc = B.numel() == 1 && A.shape() != B.shape();
  if (!sc && A.shape() != B.shape())
    shape_fail("mul", A.shape(), B.shape());
  Tensor C = A;
  for (std::size_t i = 0; i < C.numel(); ++i)
    C[i] *= B[sc ? 0 : i];
  const std::size_t ai = a.index, bi = b.index;
  return a.tape->record(std::move(C), {a, b}, [ai, bi, sc](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    const Tensor &A = t.node(ai).value;
    const Tensor &B = t.node(bi).value;
    if (t.needs_grad(ai)) {
      Tensor &GA = t.grad_of(ai);
      for (std::size_t i = 0; i < G.numel(); ++i)
        GA[i] += G[i] * B[sc ? 0 : i];
    }
    if (t.needs_grad(bi)) {
      Tensor &GB = t.grad_of(bi);
      for (std::size_t i = 0; i < G.numel(); ++i)
        GB[sc ? 0 : i] += G[i] * A[i];
    }
  });
}

Var scale(Var a, double k) {
  return elementwise(a, [k](double x) { return k * x; },
                     [k](double, double) { return k; });
}

Var sigmoid(Var a) {
  return elementwise(
      a,
      [](double x) {
        if (x >= 0)
          return 1.0 / (1.0 + std::exp(-x));
        const double e = std::exp(x);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(Var a) {
  return elementwise(a, [](double x) { return std::tanh(x); },
                     [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return elementwise(a, [](double x) { return x > 0 ? x : 0.0; },
                     [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var exp(Var a) {
  return elementwise(a, [](double x) { return std::exp(x); },
                     [](double, double y) { return y; });
}

Var log(Var a, double floor) {
  return elementwise(
      a, [floor](double x) { return std::log(x < floor ? floor : x); }, // NaN passes through
      [floor](double x, double) { return x < floor ? 0.0 : 1.0 / x; });
}

Var concat(std::initializer_list<Var> parts, std::size_t axis) {
  return concat(std::span<const Var>(parts.begin(), parts.size()), axis);
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty())
    throw ShapeError("concat: no operands");
  const Shape &s0 = parts[0].shape();
  check_axis("concat", s0, axis);
  Shape out = s0;
  out[axis] = 0;
  for (const Var &p : parts) {
    const Shape &s = p.shape();
    if (s.size() != s0.size())
      shape_fail("concat", s0, s);
    for (std::size_t i = 0; i < s.size(); ++i)
      if (i != axis && s[i] != s0[i])
        shape_fail("concat", s0, s);
    out[axis] += s[axis];
  }
  const AxisView ov = axis_view(out, axis);
  Tensor C(out);
  std::vector<std::size_t> offsets, widths, idx;
  std::size_t off = 0;
  for (const Var &p : parts) {
    const Tensor &P = p.value();
    const std::size_t w = P.dim(axis) * ov.inner;
    for (std::size_t o = 0; o < ov.outer; ++o)
      std::copy_n(&P.data()[o * w], w, &C.data()[o * ov.n * ov.inner + off]);
    offsets.push_back(off);
    widths.push_back(w);
    idx.push_back(p.index);
    off += w;
  }
  const std::size_t stride = ov.n * ov.inner, outer = ov.outer;
  return parts[0].tape->record(
      std::move(C), parts, [idx, offsets, widths, stride, outer](Tape &t, std::size_t self) {
        const Tensor &G = t.node(self).grad;
        for (std::size_t k = 0; k < idx.size(); ++k) {
          if (!t.needs_grad(idx[k]))
            continue;
          Tensor &GP = t.grad_of(idx[k]);
          for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t j = 0; j < widths[k]; ++j)
              GP[o * widths[k] + j] += G[o * stride + offsets[k] + j];
        }
      });
}

Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t end) {
  const Shape &s = a.shape();
  check_axis("slice", s, axis);
  if (begin >= end || end > s[axis])
    shape_fail("slice", s,
               "cannot be sliced to [" + std::to_string(begin) + ", " +
                   std::to_string(end) + ") on axis " + std::to_string(axis));
  const AxisView v = axis_view(s, axis);
  Shape out = s;
  out[axis] = end - begin;
  Tensor C(out);
  const std::size_t w = (end - begin) * v.inner;
  const Tensor &A = a.value();
  for (std::size_t o = 0; o < v.outer; ++o)
    std::copy_n(&A.data()[o * v.n * v.inner + begin * v.inner], w,
                &C.data()[o * w]);
  const std::size_t ai = a.index, outer = v.outer, stride = v.n * v.inner,
                    off = begin * v.inner;
  return a.tape->record(std::move(C), {a}, [ai, outer, stride, off, w](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    Tensor &GA = t.grad_of(ai);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t j = 0; j < w; ++j)
        GA[o * stride + off + j] += G[o * w + j];
  });
}

Var reshape(Var a, Shape shape) {
  Tensor C = a.value();
  C.reshape(std::move(shape));
  const std::size_t ai = a.index;
  return a.tape->record(std::move(C), {a}, [ai](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    Tensor &GA = t.grad_of(ai);
    for (std::size_t i = 0; i < G.numel(); ++i)
      GA[i] += G[i];
  });
}

namespace {

Var reduce_linear(const char *op, Var a, std::size_t axis, bool average) {
  const Shape &s = a.shape();
  check_axis(op, s, axis);
  const AxisView v = axis_view(s, axis);
  const double k = average ? 1.0 / static_cast<double>(v.n) : 1.0;
  Tensor C(drop_axis(s, axis));
  const Tensor &A = a.value();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t j = 0; j < v.n; ++j)
      for (std::size_t i = 0; i < v.inner; ++i)
        C[o * v.inner + i] += k * A[(o * v.n + j) * v.inner + i];
  const std::size_t ai = a.index;
  return a.tape->record(std::move(C), {a}, [ai, v, k](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    Tensor &GA = t.grad_of(ai);
    for (std::size_t o = 0; o < v.outer; ++o)
      for (std::size_t j = 0; j < v.n; ++j)
        for (std::size_t i = 0; i < v.inner; ++i)
          GA[(o * v.n + j) * v.inner + i] += k * G[o * v.inner + i];
  });
}

} // namespace

Var sum(Var a, std::size_t axis) { return reduce_linear("sum", a, axis, false); }
Var mean(Var a, std::size_t axis) { return reduce_linear("mean", a, axis, true); }

Var sum_all(Var a) {
  const Tensor &A = a.value();
  double s = 0.0;
  for (std::size_t i = 0; i < A.numel(); ++i)
    s += A[i];
  const std::size_t ai = a.index;
  return a.tape->record(Tensor::scalar(s), {a}, [ai](Tape &t, std::size_t self) {
    const double g = t.node(self).grad[0];
    Tensor &GA = t.grad_of(ai);
    for (std::size_t i = 0; i < GA.numel(); ++i)
      GA[i] += g;
  });
}

Var max(Var a, std::size_t axis) {
  const Shape &s = a.shape();
  check_axis("max", s, axis);
  const AxisView v = axis_view(s, axis);
  Tensor C(drop_axis(s, axis));
  std::vector<std::size_t> argmax(C.numel());
  const Tensor &A = a.value();
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t i = 0; i < v.inner; ++i) {
      std::size_t best = (o * v.n) * v.inner + i;
      for (std::size_t j = 1; j < v.n; ++j) {
        const std::size_t at = (o * v.n + j) * v.inner + i;
        if (A[at] > A[best])
          best = at;
      }
      C[o * v.inner + i] = A[best];
      argmax[o * v.inner + i] = best;
    }
  const std::size_t ai = a.index;
  return a.tape->record(std::move(C), {a}, [ai, argmax](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    Tensor &GA = t.grad_of(ai);
    for (std::size_t i = 0; i < G.numel(); ++i)
      GA[argmax[i]] += G[i];
  });
}

Var softmax(Var a, std::size_t axis) {
  const Shape &s = a.shape();
  check_axis("softmax", s, axis);
  const AxisView v = axis_view(s, axis);
  const Tensor &A = a.value();
  Tensor Y(s);
  for (std::size_t o = 0; o < v.outer; ++o)
    for (std::size_t i = 0; i < v.inner; ++i) {
      auto at = [&](std::size_t j) { return (o * v.n + j) * v.inner + i; };
      double m = A[at(0)];
      for (std::size_t j = 1; j < v.n; ++j)
        m = std::max(m, A[at(j)]);
      double z = 0.0;
      for (std::size_t j = 0; j < v.n; ++j) {
        Y[at(j)] = std::exp(A[at(j)] - m);
        z += Y[at(j)];
      }
      for (std::size_t j = 0; j < v.n; ++j)
        Y[at(j)] /= z;
    }
  const std::size_t ai = a.index;
  return a.tape->record(std::move(Y), {a}, [ai, v](Tape &t, std::size_t self) {
    const Tensor &Y = t.node(self).value;
    const Tensor &G = t.node(self).grad;
    Tensor &GA = t.grad_of(ai);
    for (std::size_t o = 0; o < v.outer; ++o)
      for (std::size_t i = 0; i < v.inner; ++i) {
        auto at = [&](std::size_t j) { return (o * v.n + j) * v.inner + i; };
        double dot = 0.0;
        for (std::size_t j = 0; j < v.n; ++j)
          dot += G[at(j)] * Y[at(j)];
        for (std::size_t j = 0; j < v.n; ++j)
          GA[at(j)] += Y[at(j)] * (G[at(j)] - dot);
      }
  });
}

Var rows(Var table, std::span<const int> ids) {
  const Tensor &T = table.value();
  if (T.rank() != 2)
    shape_fail("rows", T.shape(), "is not a matrix");
  const std::size_t n = T.dim(0), d = T.dim(1);
  std::vector<int> idv(ids.begin(), ids.end());
  Tensor C(Shape{idv.size(), d});
  for (std::size_t i = 0; i < idv.size(); ++i) {
    if (idv[i] < 0 || static_cast<std::size_t>(idv[i]) >= n)
      throw std::out_of_range("rows: id " + std::to_string(idv[i]) +
                              " outside table of " + std::to_string(n) + " rows");
    std::copy_n(&T.data()[static_cast<std::size_t>(idv[i]) * d], d, &C.data()[i * d]);
  }
  const std::size_t ti = table.index;
  return table.tape->record(std::move(C), {table}, [ti, idv, d](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    Tensor &GT = t.grad_of(ti);
    for (std::size_t i = 0; i < idv.size(); ++i)
      for (std::size_t j = 0; j < d; ++j)
        GT[static_cast<std::size_t>(idv[i]) * d + j] += G[i * d + j];
  });
}

Var unfold(Var a, std::size_t width) {
  const Tensor &A = a.value();
  if (A.rank() != 2)
    shape_fail("unfold", A.shape(), "is not a matrix");
  const std::size_t len = A.dim(0), d = A.dim(1);
  if (width == 0 || len < width)
    shape_fail("unfold", A.shape(),
               "is shorter than window width " + std::to_string(width));
  const std::size_t out_len = len - width + 1, w = width * d;
  Tensor C(Shape{out_len, w});
  for (std::size_t i = 0; i < out_len; ++i)
    std::copy_n(&A.data()[i * d], w, &C.data()[i * w]);
  const std::size_t ai = a.index;
  return a.tape->record(std::move(C), {a}, [ai, out_len, w, d](Tape &t, std::size_t self) {
    const Tensor &G = t.node(self).grad;
    Tensor &GA = t.grad_of(ai);
    for (std::size_t i = 0; i < out_len; ++i)
      for (std::size_t j = 0; j < w; ++j)
        GA[i * d + j] += G[i * w + j];
  });
}

// ------------------------------------------------------------ grad_check

double grad_check(const std::function<Var(Tape &)> &f,
                  std::span<Parameter *const> params, double eps, ErrorScale scale) {
  if (!(eps > 0))
    throw std::invalid_argument("grad_check: eps must be positive");
  auto eval = [&]() {
    Tape t;
    const double v = f(t).value().item();
    if (!std::isfinite(v))
      throw std::domain_error("grad_check: objective is not finite");
    return v;
  };
  for (Parameter *p : params)
    p->zero_grad();
  {
    Tape t;
    Var loss = f(t);
    if (!std::isfinite(loss.value().item()))
      throw std::domain_error("grad_check: objective is not finite");
    t.backward(loss);
  }
  double worst = 0.0;
  for (Parameter *p : params) {
    const Tensor analytic = p->grad;
    std::vector<double> numeric(p->value.numel());
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      const double orig = p->value[i];
      p->value[i] = orig + eps;
      const double up = eval();
      p->value[i] = orig - eps;
      const double down = eval();
      p->value[i] = orig;
      numeric[i] = (up - down) / (2 * eps);
    }
    double tensor_scale = 1e-8;
    for (std::size_t i = 0; i < numeric.size(); ++i)
      tensor_scale = std::max({tensor_scale, std::abs(analytic[i]), std::abs(numeric[i])});
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      const double denom = scale == ErrorScale::PerTensor
                               ? tensor_scale
                               : std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-8});
      worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / denom);
    }
  }
  return worst;
}

} // namespace morphkit::ad
