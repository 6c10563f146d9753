// tests/test_model.cpp

// Copyright 2026 The FCM Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "error.hpp"
#include "model.hpp"
#include "oracles.hpp"

using namespace fcm;

namespace {

double MaxAbs(const ModelParams &p) {
  double m = 0;
  p.ForEach([&](const char *, const Matrix &x) { m = std::max(m, x.cwiseAbs().maxCoeff()); });
  return m;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("init is deterministic, shaped and bounded") {
    ModelParams a = InitParams(6, 5, 7, 1), b = InitParams(6, 5, 7, 1), c = InitParams(6, 5, 7, 2);
    CHECK(a == b);
    CHECK_FALSE(a == c);
    CHECK(MaxAbs(a) <= 0.08);
    ModelParams t = InitParams(1, 2, 2, 3);
    CHECK(t.src_embed.rows() == 2);
    CHECK(t.src_embed.cols() == 1);
    CHECK(t.out_proj.rows() == 1);
    CHECK(t.out_proj.cols() == 2);
    CHECK(t.out_bias.rows() == 1);
    CHECK(t.out_bias.cols() == 2);
    CHECK(t.ParameterCount() == 2 + 2 + 4 * 1 + 2 + 2);
    CHECK_THROWS_AS(InitParams(0, 2, 2, 1), Error);
  }

  TEST_CASE("teacher forcing rows are log distributions") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
      ModelParams p = oracle::RandomParams(5, 4, 6, seed, 1.0);
      ForwardTrace t = ForwardTeacher(p, {1, 3, 2, 0}, {0, 2, 5, 3});
      for (int n = 0; n < t.num_steps(); ++n)
        CHECK(std::abs(t.log_probs.row(n).array().exp().sum() - 1.0) < 1e-6);
    }
    ModelParams p = oracle::RandomParams(3, 2, 4, 9);
    ForwardTrace one = ForwardTeacher(p, {1}, {Vocabulary::kBos});
    CHECK(one.num_steps() == 1);
    CHECK_THROWS_AS(ForwardTeacher(p, {1}, {2}), Error);
    CHECK_THROWS_AS(ForwardTeacher(p, {7}, {0}), Error);
  }

  TEST_CASE("zero parameters give the uniform distribution") {
    ModelParams p = ModelParams::Zeros(4, 3, 6);
    ForwardTrace t = ForwardTeacher(p, {0, 1, 2}, {0, 3, 4});
    for (int n = 0; n < 3; ++n)
      for (int i = 0; i < 6; ++i) CHECK(t.log_probs(n, i) == doctest::Approx(-std::log(6.0)));
    StepOutput o = ForwardStep(p, StartDecode(p, std::vector<int>{0}), 0);
    for (int i = 0; i < 6; ++i) CHECK(o.log_probs[i] == doctest::Approx(-std::log(6.0)));
  }

  TEST_CASE("incremental replay equals teacher forcing") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      ModelParams p = oracle::RandomParams(7, 5, 6, 100 + seed, 1.0);
      std::vector<int> input = {4, 1, 0, 3, 2};
      std::vector<int> target = {0, 3, 5, 2, 2, 4};
      ForwardTrace t = ForwardTeacher(p, input, target);
      DecodeState st = StartDecode(p, input);
      for (size_t n = 0; n < target.size(); ++n) {
        StepOutput o = ForwardStep(p, st, target[n]);
        CHECK((o.log_probs - t.log_probs.row(n)).cwiseAbs().maxCoeff() <= 1e-10);
        st = o.next;
      }
    }
    ModelParams p = oracle::RandomParams(3, 2, 4, 1);
    DecodeState s = StartDecode(p, {1});
    CHECK(ForwardStep(p, s, 0).log_probs == ForwardStep(p, s, 0).log_probs);
    ModelParams other = p;
    CHECK_THROWS_AS(ForwardStep(other, s, 0), Error);
  }

  TEST_CASE("backward is linear and zero on an empty signal") {
    ModelParams p = oracle::RandomParams(4, 3, 5, 4);
    ForwardTrace t = ForwardTeacher(p, {2, 1}, {0, 3, 4});
    ParamGradients zero = Backward(p, t, {});
    CHECK(MaxAbs(zero) == 0.0);
    StepGradient g;
    g.Add(0, 2, 0.7);
    g.Add(2, 4, -1.3);
    ParamGradients once = Backward(p, t, g);
    ParamGradients twice = Backward(p, t, g.Scaled(2.0));
    ParamGradients expect = once;
    expect.AddScaled(once, 1.0);
    CHECK(twice == expect);
    StepGradient dup;
    dup.Add(1, 1, 1.0);
    dup.Add(1, 1, 2.0);
    CHECK_THROWS_AS(dup.Validate(), Error);
    StepGradient nan;
    nan.Add(0, 1, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(nan.Validate(), Error);
  }

  TEST_CASE("single cell backward matches central differences") {
    ModelParams p = oracle::RandomParams(4, 3, 5, 17);
    std::vector<int> input = {1, 2, 0}, target = {0};
    for (int i = 0; i < 5; ++i) {
      StepGradient g;
      g.Add(0, i, 1.0);
      ForwardTrace t = ForwardTeacher(p, input, target);
      auto check = oracle::CompareWithCentralDifferences(
          p, Backward(p, t, g),
          [&](const ModelParams &q) { return oracle::SparseObjective(q, input, target, g); });
      CHECK(check.max_rel_error <= 1e-4);
    }
  }

  TEST_CASE("random sparse signals match central differences") {
    std::mt19937_64 eng(5);
    for (int trial = 0; trial < 10; ++trial) {
      int d = 1 + static_cast<int>(eng() % 8), S = 2 + static_cast<int>(eng() % 4),
          V = 3 + static_cast<int>(eng() % 4);
      ModelParams p = oracle::RandomParams(d, S, V, eng(), 0.8);
      std::vector<int> input, target = {0};
      for (int j = 0; j < 1 + static_cast<int>(eng() % 4); ++j) input.push_back(eng() % S);
      for (int n = 0; n < static_cast<int>(eng() % 4); ++n) target.push_back(eng() % V);
      StepGradient g;
      for (int n = 0; n < static_cast<int>(target.size()); ++n)
        for (int i = 0; i < V; ++i)
          if (eng() % 3 == 0) g.Add(n, i, std::uniform_real_distribution<double>(-2, 2)(eng));
      ForwardTrace t = ForwardTeacher(p, input, target);
      auto check = oracle::CompareWithCentralDifferences(
          p, Backward(p, t, g),
          [&](const ModelParams &q) { return oracle::SparseObjective(q, input, target, g); });
      CHECK(check.max_rel_error <= 1e-4);
    }
  }

  TEST_CASE("updates") {
    ModelParams p = oracle::RandomParams(3, 2, 4, 2);
    ModelParams ones = p.ZerosLike();
    ones.ForEach([](const char *, Matrix &m) { m.setOnes(); });
    ModelParams q = p;
    ApplyUpdate(q, ones, 0.0);
    CHECK(q == p);
    ApplyUpdate(q, ones, 1.0);
    ModelParams expect = p;
    expect.ForEach([](const char *, Matrix &m) { m.array() += 1.0; });
    CHECK(q == expect);
    ModelParams bad = ones;
    bad.attention(0, 0) = std::numeric_limits<double>::infinity();
    ModelParams before = q;
    CHECK_THROWS_AS(ApplyUpdate(q, bad, 0.1), Error);
    CHECK(q == before);
  }

  TEST_CASE("one small ascent step increases the objective") {
    ModelParams p = oracle::RandomParams(4, 3, 5, 23);
    std::vector<int> input = {0, 2}, target = {0, 3, 2};
    StepGradient g;
    g.Add(0, 3, 1.0);
    g.Add(1, 2, 0.5);
    g.Add(2, 1, 1.0);
    double before = oracle::SparseObjective(p, input, target, g);
    ApplyUpdate(p, Backward(p, ForwardTeacher(p, input, target), g), 1e-3);
    CHECK(oracle::SparseObjective(p, input, target, g) > before);
  }

  TEST_CASE("checkpoint round trip") {
    Model m;
    m.vocab = Vocabulary({"<s>", "</s>", "a", "b"});
    m.params = oracle::RandomParams(3, 5, 4, 8);
    auto path = std::filesystem::temp_directory_path() / "fcm_unit_ckpt.json";
    SaveCheckpoint(m, path);
    Model back = LoadCheckpoint(path);
    CHECK(back.params == m.params);
    CHECK(back.vocab == m.vocab);
    nlohmann::json j = CheckpointToJson(m);
    j["d"] = 7;
    CHECK_THROWS_AS(CheckpointFromJson(j), Error);
  }
}
