// src/model.hpp

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

// Attention encoder-decoder with an explicit forward trace and a backward
// pass driven by gradients with respect to the per-step log-outputs.
//
// Row-vector convention throughout. For source symbols x_0..x_{J-1} and a
// conditioning sequence y_0 = BOS, y_1, ..., y_{T-1}:
//
//   h_j = tanh(E_s[x_j] W_e)                    encoder state
//   k_j = h_j + pos(j)                          attention key
//   s_n = tanh(E_t[y_n] W_x + s_{n-1} W_h)      decoder state, s_{-1} = 0
//   q_n = s_n + pos(n)                          attention query
//   a_n = softmax_j(q_n A k_j^T)
//   c_n = sum_j a_nj h_j
//   z_n = tanh(s_n + c_n)
//   log o_n = log_softmax(z_n W_o + b)
//
// pos() is a fixed sinusoidal code; it carries no parameters.

#ifndef FCM_MODEL_HPP_
#define FCM_MODEL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "json.hpp"

namespace fcm {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

struct ModelParams {
  int dim = 0;
  Matrix src_embed;  // S x d
  Matrix tgt_embed;  // V x d
  Matrix enc_proj;   // d x d
  Matrix dec_input;  // d x d
  Matrix dec_state;  // d x d
  Matrix attention;  // d x d
  Matrix out_proj;   // d x V
  Matrix out_bias;   // 1 x V

  int source_vocab_size() const { return static_cast<int>(src_embed.rows()); }
  int target_vocab_size() const { return static_cast<int>(tgt_embed.rows()); }

  static ModelParams Zeros(int dim, int source_vocab, int target_vocab);
  ModelParams ZerosLike() const { return Zeros(dim, source_vocab_size(), target_vocab_size()); }

  // fn(name, matrix) over every parameter matrix, in checkpoint order.
  template <typename Fn>
  void ForEach(Fn &&fn) {
    fn("src_embed", src_embed);
    fn("tgt_embed", tgt_embed);
    fn("enc_proj", enc_proj);
    fn("dec_input", dec_input);
    fn("dec_state", dec_state);
    fn("attention", attention);
    fn("out_proj", out_proj);
    fn("out_bias", out_bias);
  }
  template <typename Fn>
  void ForEach(Fn &&fn) const {
    const_cast<ModelParams *>(this)->ForEach(
        [&](const char *name, Matrix &m) { fn(name, static_cast<const Matrix &>(m)); });
  }

  size_t ParameterCount() const;
  // this += scale * other
  void AddScaled(const ModelParams &other, double scale);
  bool operator==(const ModelParams &o) const;
};

// Gradients share the parameter layout.
using ParamGradients = ModelParams;

/// Entries uniform in [-0.08, 0.08], deterministic in seed.
ModelParams InitParams(int dim, int source_vocab, int target_vocab, uint64_t seed);

RowVector PositionalCode(int position, int dim);

struct EncoderCache {
  std::vector<int> input;
  Matrix states;  // J x d, h_j
  Matrix keys;    // J x d, h_j + pos(j)
};

struct StepCache {
  int token = 0;  // conditioning token y_n
  RowVector prev_state;
  RowVector state;
  RowVector query;
  RowVector attn;  // 1 x J
  RowVector context;
  RowVector hidden;  // z_n
  RowVector log_probs;
};

/// Per-step log-distributions plus everything backward needs.
struct ForwardTrace {
  std::shared_ptr<const EncoderCache> encoder;
  std::vector<int> conditioning;
  Matrix log_probs;  // T x V, row n is log o_n
  std::vector<StepCache> steps;

  int num_steps() const { return static_cast<int>(steps.size()); }
};

struct GradCell {
  int step = 0;
  int token = 0;
  double value = 0.0;
};

/// Sparse dF/dlog(o_{n,i}).
struct StepGradient {
  std::vector<GradCell> cells;

  void Add(int step, int token, double value) { cells.push_back({step, token, value}); }
  StepGradient Scaled(double a) const;
  // Throws if an (n, i) pair repeats or a value is not finite.
  void Validate() const;
};

struct DecodeState {
  std::shared_ptr<const EncoderCache> encoder;
  const ModelParams *owner = nullptr;
  RowVector state;
  int step = 0;
};

struct StepOutput {
  RowVector log_probs;
  DecodeState next;
};

std::shared_ptr<const EncoderCache> EncodeInput(const ModelParams &params,
                                                const std::vector<int> &input);

DecodeState StartDecode(const ModelParams &params, const std::vector<int> &input);
DecodeState StartDecode(const ModelParams &params, std::shared_ptr<const EncoderCache> encoder);

/// One incremental decoder step; identical arithmetic to ForwardTeacher.
StepOutput ForwardStep(const ModelParams &params, const DecodeState &state, int token);

/// Teacher-forced pass along `target`, which must start with BOS.
ForwardTrace ForwardTeacher(const ModelParams &params, const std::vector<int> &input,
                            const std::vector<int> &target);

/// dF/dtheta for F = sum g_{n,i} log o_{n,i}.
ParamGradients Backward(const ModelParams &params, const ForwardTrace &trace,
                        const StepGradient &grad);

/// params += learning_rate * gradients. All-or-nothing: non-finite gradient
/// entries leave params untouched and throw kNumeric naming the matrix.
void ApplyUpdate(ModelParams &params, const ParamGradients &gradients, double learning_rate);

/// A parameter set together with the token inventory it was trained on.
struct Model {
  Vocabulary vocab;
  ModelParams params;
};

nlohmann::json CheckpointToJson(const Model &model);
Model CheckpointFromJson(const nlohmann::json &j);
void SaveCheckpoint(const Model &model, const std::filesystem::path &path);
Model LoadCheckpoint(const std::filesystem::path &path);

}  // namespace fcm

#endif  // FCM_MODEL_HPP_
