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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mixsemi/autodiff.hpp"
#include "mixsemi/data.hpp"
#include "mixsemi/error.hpp"
#include "mixsemi/metrics.hpp"
#include "support.hpp"

using namespace mixsemi;

namespace {

std::vector<std::size_t> class_counts(const Dataset& d) {
  std::vector<std::size_t> c(d.classes(), 0);
  for (std::size_t i = 0; i < d.size(); ++i) ++c[d.class_of(i)];
  return c;
}

// Softmax regression on raw pixels, trained with the library's own optimizer.
double linear_probe_accuracy(const Dataset& train_set, const Dataset& test) {
  const std::size_t d = train_set.inputs.row_size(), c = train_set.classes();
  const Tensor x = train_set.inputs.reshaped({train_set.size(), d});
  ParamStore store;
  store.add("w", Tensor({d, c}));
  store.add("b", Tensor({c}));
  for (int epoch = 0; epoch < 300; ++epoch) {
    Tape tape;
    const Var z = ad::add_row_bias(ad::matmul(tape.constant(x), tape.parameter(store, 0)), tape.parameter(store, 1));
    tape.backward(ad::soft_cross_entropy(z, train_set.labels));
    adam_step(store, tape.param_grads(store), 1e-2);
  }
  Tape tape(false);
  const Var z = ad::add_row_bias(ad::matmul(tape.constant(test.inputs.reshaped({test.size(), d})),
                                            tape.constant(store.value(0))),
                                 tape.constant(store.value(1)));
  return accuracy(softmax_rows(z.value()), test.labels);
}

}  // namespace

TEST_SUITE("two moons") {
  TEST_CASE("parameterization") {
    const auto [x0, y0] = moon_point(0, 0.0);
    CHECK(x0 == 1.0);
    CHECK(y0 == 0.0);
    const auto [x1, y1] = moon_point(1, 0.0);
    CHECK(x1 == 0.0);
    CHECK(y1 == 0.5);
  }

  TEST_CASE("noiseless points lie on their half-circles") {
    const Dataset d = two_moons(400, 0.0, 1);
    CHECK(d.size() == 400);
    std::set<std::pair<double, double>> seen[2];
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double x = d.inputs.at(i, 0), y = d.inputs.at(i, 1);
      const std::size_t c = d.class_of(i);
      seen[c].insert({x, y});
      if (c == 0) {
        CHECK(std::abs(std::hypot(x, y) - 1.0) < 1e-12);
        CHECK(y >= -1e-12);
      } else {
        CHECK(std::abs(std::hypot(x - 1.0, y - 0.5) - 1.0) < 1e-12);
        CHECK(y <= 0.5 + 1e-12);
      }
    }
    for (const auto& p : seen[0]) CHECK(seen[1].count(p) == 0);
    CHECK(class_counts(d) == std::vector<std::size_t>{200, 200});
  }

  TEST_CASE("deterministic per seed and odd counts rejected") {
    CHECK(two_moons(50, 0.1, 3).inputs == two_moons(50, 0.1, 3).inputs);
    CHECK_FALSE(two_moons(50, 0.1, 3).inputs == two_moons(50, 0.1, 4).inputs);
    CHECK_THROWS_AS(two_moons(51, 0.1, 3), ParameterError);
  }
}

TEST_SUITE("synthetic images") {
  TEST_CASE("deterministic and within range") {
    const Dataset a = synth_images(70, 7, 16, 5);
    CHECK(a.inputs == synth_images(70, 7, 16, 5).inputs);
    CHECK(a.labels == synth_images(70, 7, 16, 5).labels);
    CHECK(a.inputs.shape() == Shape{70, 1, 16, 16});
    for (double v : a.inputs.values()) CHECK_UNARY(v >= 0.0 && v <= 1.0);
    CHECK(class_counts(a) == std::vector<std::size_t>(7, 10));
  }

  TEST_CASE("unsupported parameters") {
    CHECK_THROWS_AS(synth_images(10, 8, 16, 1), ParameterError);
    CHECK_THROWS_AS(synth_images(10, 1, 16, 1), ParameterError);
    CHECK_THROWS_AS(synth_images(10, 3, 12, 1), ParameterError);
  }

  TEST_CASE("a linear probe beats chance but does not solve the task") {
    const Dataset d = synth_images(700, 7, 16, 11);
    std::vector<std::size_t> tr(500), te(200);
    std::iota(tr.begin(), tr.end(), std::size_t{0});
    std::iota(te.begin(), te.end(), std::size_t{500});
    const double acc = linear_probe_accuracy(d.subset(tr), d.subset(te));
    MESSAGE("linear probe accuracy " << acc);
    CHECK(acc > 1.0 / 7.0);
    CHECK(acc < 0.95);
  }
}

TEST_SUITE("splits") {
  TEST_CASE("six labeled moons split three per class") {
    const Dataset d = two_moons(1706, 0.1, 2);
    const Splits s = split(d, SplitSpec{6, 100, 500, true, 2});
    CHECK(class_counts(s.labeled) == std::vector<std::size_t>{3, 3});
    CHECK(s.unlabeled.size() == 1100);
  }

  TEST_CASE("partitions are disjoint and cover the dataset") {
    const Dataset d = synth_images(140, 7, 16, 3);
    const Splits s = split(d, SplitSpec{15, 20, 30, true, 9});
    std::vector<std::size_t> all;
    for (const auto* idx : {&s.labeled_idx, &s.unlabeled_idx, &s.validation_idx, &s.test_idx})
      all.insert(all.end(), idx->begin(), idx->end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expected(140);
    std::iota(expected.begin(), expected.end(), std::size_t{0});
    CHECK(all == expected);
    for (const Dataset* part : {&s.labeled, &s.validation, &s.test}) {
      const auto counts = class_counts(*part);
      CHECK(*std::max_element(counts.begin(), counts.end()) - *std::min_element(counts.begin(), counts.end()) <= 1);
    }
    CHECK(s.labeled.inputs == d.inputs.gather_rows(s.labeled_idx));
  }

  TEST_CASE("same spec and seed give the same indices") {
    const Dataset d = two_moons(200, 0.1, 1);
    const Splits a = split(d, SplitSpec{6, 20, 30, true, 4});
    const Splits b = split(d, SplitSpec{6, 20, 30, true, 4});
    CHECK(a.labeled_idx == b.labeled_idx);
    CHECK(a.unlabeled_idx == b.unlabeled_idx);
    CHECK(a.test_idx == b.test_idx);
    CHECK_FALSE(split(d, SplitSpec{6, 20, 30, true, 5}).labeled_idx == a.labeled_idx);
  }

  TEST_CASE("infeasible specs") {
    const Dataset d = two_moons(20, 0.1, 1);
    CHECK_THROWS_AS(split(d, SplitSpec{10, 10, 10, true, 1}), ParameterError);
  }
}

TEST_SUITE("augmentation") {
  TEST_CASE("identity transform") {
    Rng rng = make_rng(1, 0);
    const Tensor img = testing::random_tensor({1, 16, 16}, rng, 0, 1);
    const Tensor out = transform_image(img, 0.0, 0.0, 0.0);
    for (std::size_t k = 0; k < img.size(); ++k) CHECK(std::abs(out[k] - img[k]) < 1e-9);
  }

  TEST_CASE("rotating a constant image keeps the interior") {
    const Tensor img({1, 16, 16}, 0.6);
    for (double angle : {-10.0, -3.3, 7.0, 10.0}) {
      const Tensor out = transform_image(img, angle, 0.0, 0.0);
      for (std::size_t r = 4; r < 12; ++r)
        for (std::size_t c = 4; c < 12; ++c) CHECK(std::abs(out[r * 16 + c] - 0.6) < 1e-6);
    }
  }

  TEST_CASE("one-pixel shift moves columns right and zero-fills") {
    Rng rng = make_rng(2, 0);
    const Tensor img = testing::random_tensor({1, 16, 16}, rng, 0, 1);
    const Tensor out = transform_image(img, 0.0, 1.0, 0.0);
    for (std::size_t r = 0; r < 16; ++r) {
      CHECK(out[r * 16] == 0.0);
      for (std::size_t c = 1; c < 16; ++c) CHECK(std::abs(out[r * 16 + c] - img[r * 16 + c - 1]) < 1e-9);
    }
  }

  TEST_CASE("random image augmentation keeps shape and range") {
    Rng rng = make_rng(3, 0);
    const Dataset d = synth_images(14, 7, 16, 1);
    const Tensor out = AugmentPolicy{AugmentKind::kRotateTranslate, 0.0}.apply(d.inputs, rng);
    CHECK(out.shape() == d.inputs.shape());
    for (double v : out.values()) CHECK_UNARY(v >= 0.0 && v <= 1.0);
    CHECK_FALSE(out == d.inputs);
  }

  TEST_CASE("gaussian noise statistics") {
    Rng rng = make_rng(4, 0);
    const Tensor x({1'000'000}, 0.25);
    CHECK(augment_noise(x, 0.0, rng) == x);
    const Tensor y = augment_noise(x, 0.15, rng);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - x[i];
      s += d;
      s2 += d * d;
    }
    const double n = static_cast<double>(y.size());
    const double mean = s / n, sd = std::sqrt(s2 / n - mean * mean);
    CHECK(std::abs(sd - 0.15) < 0.0015);
    CHECK(std::abs(mean) < 3.0 * 0.15 / std::sqrt(n));
    CHECK_THROWS_AS(augment_noise(x, -1.0, rng), ParameterError);
  }

  TEST_CASE("policy text round trip") {
    for (const char* text : {"none", "rotate_translate", "gaussian_noise:0.15", "point_jitter:0.05"})
      CHECK(AugmentPolicy::parse(AugmentPolicy::parse(text).to_string()) == AugmentPolicy::parse(text));
    CHECK_THROWS_AS(AugmentPolicy::parse("blur"), ConfigError);
  }
}
