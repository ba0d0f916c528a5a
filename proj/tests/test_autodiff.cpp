// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "morphkit/autodiff.hpp"
#include "morphkit/checkpoint.hpp"

using namespace morphkit::ad;

namespace {

Tensor random_tensor(Shape s, std::mt19937_64 &rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Tensor t(std::move(s));
  for (auto &v : t.data())
    v = u(rng);
  return t;
}

} // namespace

TEST_CASE("relu clips negatives") {
  Tape t;
  auto y = relu(t.constant(Tensor::row({-1, 0, 2})));
  CHECK(y.value()[0] == 0.0);
  CHECK(y.value()[1] == 0.0);
  CHECK(y.value()[2] == 2.0);
}

TEST_CASE("softmax of a constant row is uniform") {
  for (double c : {-50.0, 0.0, 3.5, 700.0}) {
    Tape t;
    auto y = softmax(t.constant(Tensor::row({c, c, c})), 1);
    for (int i = 0; i < 3; ++i)
      CHECK(y.value()[i] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }
}

TEST_CASE("matmul of ones") {
  Tape t;
  auto y = matmul(t.constant(Tensor({2, 3}, 1.0)), t.constant(Tensor({3, 1}, 1.0)));
  REQUIRE(y.shape() == Shape{2, 1});
  CHECK(y.value()[0] == 3.0);
  CHECK(y.value()[1] == 3.0);
}

TEST_CASE("shape mismatch names both shapes") {
  Tape t;
  auto a = t.constant(Tensor({2, 3}));
  auto b = t.constant(Tensor({2, 3}));
  try {
    matmul(a, b);
    FAIL("expected ShapeError");
  } catch (const ShapeError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("2x3") != std::string::npos);
  }
  CHECK_THROWS_AS(add(a, t.constant(Tensor({3, 2}))), ShapeError);
}

TEST_CASE("backward of sum is ones") {
  ParamStore s;
  auto &x = s.add("x", "g", Tensor({2, 3}, 0.7));
  Tape t;
  t.backward(sum_all(t.param(x)));
  for (double g : x.grad.data())
    CHECK(g == 1.0);
}

TEST_CASE("backward of sum(x*x) is 2x") {
  ParamStore s;
  auto &x = s.add("x", "g", Tensor::row({1, 2}));
  auto &unused = s.add("u", "g", Tensor::row({5}));
  Tape t;
  auto v = t.param(x);
  t.backward(sum_all(mul(v, v)));
  CHECK(x.grad[0] == 2.0);
  CHECK(x.grad[1] == 4.0);
  CHECK(unused.grad[0] == 0.0);
}

TEST_CASE("backward rejects a non-scalar loss") {
  Tape t;
  auto v = t.constant(Tensor::row({1, 2}));
  CHECK_THROWS(t.backward(v));
}

TEST_CASE("grad_check of a linear function is exact") {
  ParamStore s;
  std::mt19937_64 rng(1);
  auto &x = s.add("x", "g", random_tensor({3, 4}, rng));
  std::vector<Parameter *> ps{&x};
  const double err = grad_check([&](Tape &t) { return sum_all(t.param(x)); }, ps, 1e-4);
  CHECK(err < 1e-10);
}

TEST_CASE("grad_check of sum(tanh(Wx))") {
  ParamStore s;
  std::mt19937_64 rng(2);
  auto &w = s.add("w", "g", random_tensor({3, 4}, rng, 0.3));
  auto &x = s.add("x", "g", random_tensor({4, 2}, rng, 0.3));
  std::vector<Parameter *> ps{&w, &x};
  const double err =
      grad_check([&](Tape &t) { return sum_all(tanh(matmul(t.param(w), t.param(x)))); }, ps, 1e-4);
  CHECK(err < 1e-4);
}

TEST_CASE("grad_check rejects non-finite objectives") {
  ParamStore s;
  auto &x = s.add("x", "g", Tensor::row({0.0}));
  std::vector<Parameter *> ps{&x};
  CHECK_THROWS(grad_check([&](Tape &t) { return sum_all(log(t.param(x))); }, ps));
}

TEST_CASE("every primitive passes grad_check") {
  std::mt19937_64 rng(3);
  ParamStore s;
  auto &a = s.add("a", "g", random_tensor({3, 4}, rng));
  auto &b = s.add("b", "g", random_tensor({3, 4}, rng));
  auto &c = s.add("c", "g", random_tensor({4, 2}, rng));
  auto &bias = s.add("bias", "g", random_tensor({4}, rng));
  auto &k = s.add("k", "g", random_tensor({1}, rng));
  auto &pos = s.add("pos", "g", Tensor({3, 4}, std::vector<double>{0.5, 1.2, 2.0, 0.9, 1.7, 0.3,
                                                                    1.1, 0.8, 2.4, 0.6, 1.4, 1.0}));
  std::vector<Parameter *> ps{&a, &b, &c, &bias, &k, &pos};
  const std::vector<int> ids{2, 0, 2, 1};

  using Fn = std::function<Var(Tape &)>;
  const std::vector<std::pair<const char *, Fn>> cases = {
      {"matmul", [&](Tape &t) { return sum_all(matmul(t.param(a), t.param(c))); }},
      {"transpose", [&](Tape &t) { return sum_all(mul(transpose(t.param(a)), transpose(t.param(b)))); }},
      {"add", [&](Tape &t) { return sum_all(mul(add(t.param(a), t.param(b)), t.param(a))); }},
      {"add bias", [&](Tape &t) { return sum_all(tanh(add(t.param(a), t.param(bias)))); }},
      {"sub", [&](Tape &t) { return sum_all(mul(sub(t.param(a), t.param(b)), t.param(b))); }},
      {"mul scalar", [&](Tape &t) { return sum_all(mul(t.param(a), t.param(k))); }},
      {"scale", [&](Tape &t) { return sum_all(tanh(scale(t.param(a), -1.7))); }},
      {"sigmoid", [&](Tape &t) { return sum_all(sigmoid(t.param(a))); }},
      {"tanh", [&](Tape &t) { return sum_all(tanh(t.param(a))); }},
      {"relu", [&](Tape &t) { return sum_all(mul(relu(t.param(a)), t.param(b))); }},
      {"exp", [&](Tape &t) { return sum_all(exp(t.param(a))); }},
      {"log", [&](Tape &t) { return sum_all(log(t.param(pos))); }},
      {"concat", [&](Tape &t) {
         return sum_all(mul(concat({t.param(a), t.param(b)}, 1), concat({t.param(b), t.param(a)}, 1)));
       }},
      {"slice", [&](Tape &t) { return sum_all(tanh(slice(t.param(a), 1, 1, 3))); }},
      {"reshape", [&](Tape &t) { return sum_all(matmul(reshape(t.param(a), {4, 3}), t.param(a))); }},
      {"sum", [&](Tape &t) { return sum_all(tanh(sum(t.param(a), 0))); }},
      {"mean", [&](Tape &t) { return sum_all(tanh(mean(t.param(a), 1))); }},
      {"max", [&](Tape &t) { return sum_all(tanh(max(t.param(a), 0))); }},
      {"softmax", [&](Tape &t) { return sum_all(mul(softmax(t.param(a), 1), t.param(b))); }},
      {"rows", [&](Tape &t) { return sum_all(tanh(rows(t.param(a), ids))); }},
      {"unfold", [&](Tape &t) { return sum_all(tanh(unfold(transpose(t.param(a)), 2))); }},
  };
  for (const auto &[name, f] : cases) {
    CAPTURE(name);
    CHECK(grad_check(f, ps) < 1e-5);
  }
}

TEST_CASE("parameter checkpoints round-trip bit-exactly") {
  std::mt19937_64 rng(4);
  ParamStore s;
  s.add("a.w", "tag", random_tensor({3, 2}, rng));
  s.add("b", "lemma", random_tensor({5}, rng));
  std::stringstream ss;
  write_params(ss, s);

  ParamStore t;
  t.add("a.w", "tag", Tensor({3, 2}));
  t.add("b", "lemma", Tensor({5}));
  read_params(ss, t);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(t.get("a.w").value[i] == s.get("a.w").value[i]);
  CHECK(t.get("b").value[4] == s.get("b").value[4]);

  ParamStore wrong;
  wrong.add("a.w", "tag", Tensor({2, 3}));
  wrong.add("b", "lemma", Tensor({5}));
  std::stringstream again;
  write_params(again, s);
  CHECK_THROWS_AS(read_params(again, wrong), CheckpointError);
}
