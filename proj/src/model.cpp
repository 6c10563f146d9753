// src/model.cpp

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

#include "model.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "error.hpp"
#include "util.hpp"

namespace fcm {

using nlohmann::json;

namespace {

constexpr double kInitRange = 0.08;
constexpr double kPositionBase = 100.0;

double LogSumExp(const RowVector &v) {
  double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

void CheckToken(const ModelParams &params, int token, const char *what) {
  if (token < 0 || token >= params.target_vocab_size())
    Fail(ErrorCode::kOutOfRange, std::string(what) + " token index " + std::to_string(token) +
                                     " outside [0, " +
                                     std::to_string(params.target_vocab_size()) + ")");
}

StepCache ComputeStep(const ModelParams &p, const EncoderCache &enc, const RowVector &prev_state,
                      int step, int token) {
  StepCache c;
  c.token = token;
  c.prev_state = prev_state;
  RowVector pre = p.tgt_embed.row(token) * p.dec_input + prev_state * p.dec_state;
  c.state = pre.array().tanh();
  c.query = c.state + PositionalCode(step, p.dim);
  RowVector scores = (c.query * p.attention) * enc.keys.transpose();
  double lse = LogSumExp(scores);
  c.attn = (scores.array() - lse).exp();
  c.context = c.attn * enc.states;
  c.hidden = (c.state + c.context).array().tanh();
  RowVector logits = c.hidden * p.out_proj + p.out_bias;
  c.log_probs = logits.array() - LogSumExp(logits);
  return c;
}

}  // namespace

// --------------------------------------------------------------- ModelParams

ModelParams ModelParams::Zeros(int dim, int source_vocab, int target_vocab) {
  Require(dim >= 1, "hidden width must be >= 1");
  if (source_vocab < 1 || target_vocab < 1)
    Fail(ErrorCode::kInvalidArgument, "vocabulary sizes must be >= 1");
  ModelParams p;
  p.dim = dim;
  p.src_embed = Matrix::Zero(source_vocab, dim);
  p.tgt_embed = Matrix::Zero(target_vocab, dim);
  p.enc_proj = Matrix::Zero(dim, dim);
  p.dec_input = Matrix::Zero(dim, dim);
  p.dec_state = Matrix::Zero(dim, dim);
  p.attention = Matrix::Zero(dim, dim);
  p.out_proj = Matrix::Zero(dim, target_vocab);
  p.out_bias = Matrix::Zero(1, target_vocab);
  return p;
}

size_t ModelParams::ParameterCount() const {
  size_t n = 0;
  ForEach([&](const char *, const Matrix &m) { n += static_cast<size_t>(m.size()); });
  return n;
}

void ModelParams::AddScaled(const ModelParams &other, double scale) {
  std::vector<const Matrix *> theirs;
  other.ForEach([&](const char *, const Matrix &m) { theirs.push_back(&m); });
  size_t k = 0;
  ForEach([&](const char *name, Matrix &m) {
    const Matrix &o = *theirs[k++];
    if (o.rows() != m.rows() || o.cols() != m.cols())
      Fail(ErrorCode::kInvalidArgument, std::string("shape mismatch in ") + name);
    m += scale * o;
  });
}

bool ModelParams::operator==(const ModelParams &o) const {
  if (dim != o.dim) return false;
  std::vector<const Matrix *> theirs;
  o.ForEach([&](const char *, const Matrix &m) { theirs.push_back(&m); });
  bool same = true;
  size_t k = 0;
  ForEach([&](const char *, const Matrix &m) {
    const Matrix &t = *theirs[k++];
    same = same && t.rows() == m.rows() && t.cols() == m.cols() && t == m;
  });
  return same;
}

ModelParams InitParams(int dim, int source_vocab, int target_vocab, uint64_t seed) {
  ModelParams p = ModelParams::Zeros(dim, source_vocab, target_vocab);
  Rng rng(seed);
  p.ForEach([&](const char *, Matrix &m) {
    // Row-major fill so the draw order does not depend on Eigen's storage.
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.Uniform(-kInitRange, kInitRange);
  });
  return p;
}

RowVector PositionalCode(int position, int dim) {
  RowVector code(dim);
  for (int k = 0; k < dim; ++k) {
    double freq = std::pow(kPositionBase, -2.0 * (k / 2) / dim);
    code[k] = (k % 2 == 0) ? std::sin(position * freq) : std::cos(position * freq);
  }
  return code;
}

StepGradient StepGradient::Scaled(double a) const {
  StepGradient out = *this;
  for (auto &c : out.cells) c.value *= a;
  return out;
}

void StepGradient::Validate() const {
  std::set<std::pair<int, int>> seen;
  for (const auto &c : cells) {
    if (!std::isfinite(c.value))
      Fail(ErrorCode::kNumeric, "non-finite step gradient at step " + std::to_string(c.step));
    if (!seen.emplace(c.step, c.token).second)
      Fail(ErrorCode::kInvalidArgument, "duplicate step gradient cell (" +
                                            std::to_string(c.step) + ", " +
                                            std::to_string(c.token) + ")");
  }
}

// ------------------------------------------------------------------- Forward

std::shared_ptr<const EncoderCache> EncodeInput(const ModelParams &params,
                                                const std::vector<int> &input) {
  if (input.empty()) Fail(ErrorCode::kInvalidArgument, "empty input sequence");
  auto enc = std::make_shared<EncoderCache>();
  enc->input = input;
  const int J = static_cast<int>(input.size());
  enc->states.resize(J, params.dim);
  enc->keys.resize(J, params.dim);
  for (int j = 0; j < J; ++j) {
    int x = input[j];
    if (x < 0 || x >= params.source_vocab_size())
      Fail(ErrorCode::kOutOfRange, "source symbol " + std::to_string(x) + " outside [0, " +
                                       std::to_string(params.source_vocab_size()) + ")");
    RowVector h = (params.src_embed.row(x) * params.enc_proj).array().tanh();
    enc->states.row(j) = h;
    enc->keys.row(j) = h + PositionalCode(j, params.dim);
  }
  return enc;
}

DecodeState StartDecode(const ModelParams &params, std::shared_ptr<const EncoderCache> encoder) {
  DecodeState s;
  s.encoder = std::move(encoder);
  s.owner = &params;
  s.state = RowVector::Zero(params.dim);
  s.step = 0;
  return s;
}

DecodeState StartDecode(const ModelParams &params, const std::vector<int> &input) {
  return StartDecode(params, EncodeInput(params, input));
}

StepOutput ForwardStep(const ModelParams &params, const DecodeState &state, int token) {
  if (state.owner != &params || !state.encoder || state.state.size() != params.dim ||
      state.encoder->states.cols() != params.dim)
    Fail(ErrorCode::kInvalidArgument, "decode state was not produced by this model");
  CheckToken(params, token, "conditioning");
  StepCache c = ComputeStep(params, *state.encoder, state.state, state.step, token);
  StepOutput out;
  out.log_probs = std::move(c.log_probs);
  out.next.encoder = state.encoder;
  out.next.owner = state.owner;
  out.next.state = std::move(c.state);
  out.next.step = state.step + 1;
  return out;
}

ForwardTrace ForwardTeacher(const ModelParams &params, const std::vector<int> &input,
                            const std::vector<int> &target) {
  if (target.empty() || target.front() != Vocabulary::kBos)
    Fail(ErrorCode::kInvalidArgument, "teacher-forced target must begin with BOS");
  for (int t : target) CheckToken(params, t, "target");
  ForwardTrace trace;
  trace.encoder = EncodeInput(params, input);
  trace.conditioning = target;
  const int T = static_cast<int>(target.size());
  trace.log_probs.resize(T, params.target_vocab_size());
  trace.steps.reserve(T);
  RowVector prev = RowVector::Zero(params.dim);
  for (int n = 0; n < T; ++n) {
    StepCache c = ComputeStep(params, *trace.encoder, prev, n, target[n]);
    trace.log_probs.row(n) = c.log_probs;
    prev = c.state;
    trace.steps.push_back(std::move(c));
  }
  return trace;
}

// ------------------------------------------------------------------ Backward

ParamGradients Backward(const ModelParams &p, const ForwardTrace &trace,
                        const StepGradient &grad) {
  const int T = trace.num_steps();
  const int V = p.target_vocab_size();
  const EncoderCache &enc = *trace.encoder;
  const int J = static_cast<int>(enc.input.size());
  ParamGradients g = p.ZerosLike();

  Matrix d_log_probs = Matrix::Zero(T, V);
  for (const auto &c : grad.cells) {
    if (c.step < 0 || c.step >= T || c.token < 0 || c.token >= V)
      Fail(ErrorCode::kOutOfRange, "gradient cell (" + std::to_string(c.step) + ", " +
                                       std::to_string(c.token) + ") outside the trace");
    d_log_probs(c.step, c.token) += c.value;
  }

  Matrix d_states = Matrix::Zero(J, p.dim);  // dF/dh_j
  RowVector d_next_state = RowVector::Zero(p.dim);
  for (int n = T - 1; n >= 0; --n) {
    const StepCache &c = trace.steps[n];
    RowVector d_state = d_next_state;

    RowVector g_row = d_log_probs.row(n);
    if ((g_row.array() != 0.0).any()) {
      double g_sum = g_row.sum();
      // log_softmax Jacobian: dl_k = g_k - p_k sum_i g_i
      RowVector d_logits = g_row - g_sum * RowVector(c.log_probs.array().exp());
      g.out_bias.row(0) += d_logits;
      g.out_proj.noalias() += c.hidden.transpose() * d_logits;
      RowVector d_hidden = d_logits * p.out_proj.transpose();
      RowVector d_pre_hidden = d_hidden.array() * (1.0 - c.hidden.array().square());
      d_state += d_pre_hidden;
      const RowVector &d_context = d_pre_hidden;

      // c = sum_j a_j h_j
      RowVector d_attn = d_context * enc.states.transpose();  // 1 x J
      d_states.noalias() += c.attn.transpose() * d_context;
      // softmax over j
      double mix = (c.attn.array() * d_attn.array()).sum();
      RowVector d_scores = c.attn.array() * (d_attn.array() - mix);
      // e_j = q A k_j^T
      RowVector weighted_keys = d_scores * enc.keys;  // sum_j de_j k_j
      RowVector qa = c.query * p.attention;
      d_state += weighted_keys * p.attention.transpose();
      g.attention.noalias() += c.query.transpose() * weighted_keys;
      d_states.noalias() += d_scores.transpose() * qa;  // via k_j = h_j + pos(j)
    }

    // s_n = tanh(E_t[y_n] W_x + s_{n-1} W_h)
    RowVector d_pre = d_state.array() * (1.0 - c.state.array().square());
    RowVector embed = p.tgt_embed.row(c.token);
    g.dec_input.noalias() += embed.transpose() * d_pre;
    g.tgt_embed.row(c.token) += d_pre * p.dec_input.transpose();
    g.dec_state.noalias() += c.prev_state.transpose() * d_pre;
    d_next_state = d_pre * p.dec_state.transpose();
  }

  // h_j = tanh(E_s[x_j] W_e)
  for (int j = 0; j < J; ++j) {
    RowVector h = enc.states.row(j);
    RowVector d_pre = d_states.row(j).array() * (1.0 - h.array().square());
    int x = enc.input[j];
    RowVector embed = p.src_embed.row(x);
    g.enc_proj.noalias() += embed.transpose() * d_pre;
    g.src_embed.row(x) += d_pre * p.enc_proj.transpose();
  }
  return g;
}

void ApplyUpdate(ModelParams &params, const ParamGradients &gradients, double learning_rate) {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    Fail(ErrorCode::kInvalidArgument, "learning rate must be a finite value >= 0");
  std::vector<std::pair<const char *, const Matrix *>> grads;
  gradients.ForEach([&](const char *name, const Matrix &m) { grads.emplace_back(name, &m); });
  size_t k = 0;
  params.ForEach([&](const char *name, const Matrix &m) {
    const Matrix &g = *grads[k++].second;
    if (g.rows() != m.rows() || g.cols() != m.cols())
      Fail(ErrorCode::kInvalidArgument, std::string("gradient shape mismatch in ") + name);
    if (!g.allFinite())
      Fail(ErrorCode::kNumeric, std::string("non-finite gradient in ") + name);
  });
  params.AddScaled(gradients, learning_rate);
}

// --------------------------------------------------------------- Checkpoints

json CheckpointToJson(const Model &model) {
  const ModelParams &p = model.params;
  json matrices = json::object();
  p.ForEach([&](const char *name, const Matrix &m) {
    std::vector<double> data;
    data.reserve(static_cast<size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    matrices[name] = {{"shape", {m.rows(), m.cols()}}, {"data", std::move(data)}};
  });
  return {{"version", 1},
          {"d", p.dim},
          {"vocab_sizes", {{"source", p.source_vocab_size()}, {"target", p.target_vocab_size()}}},
          {"tokens", model.vocab.tokens()},
          {"matrices", std::move(matrices)}};
}

Model CheckpointFromJson(const json &j) {
  try {
    if (j.at("version").get<int>() != 1)
      Fail(ErrorCode::kParse, "unsupported checkpoint version");
    int dim = j.at("d").get<int>();
    int S = j.at("vocab_sizes").at("source").get<int>();
    int V = j.at("vocab_sizes").at("target").get<int>();
    Model model{Vocabulary(j.at("tokens").get<std::vector<std::string>>()),
                ModelParams::Zeros(dim, S, V)};
    if (model.vocab.size() != V)
      Fail(ErrorCode::kParse, "checkpoint token list does not match vocab_sizes.target");
    const json &mats = j.at("matrices");
    model.params.ForEach([&](const char *name, Matrix &m) {
      const json &entry = mats.at(name);
      auto shape = entry.at("shape").get<std::vector<long>>();
      auto data = entry.at("data").get<std::vector<double>>();
      if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols() ||
          data.size() != static_cast<size_t>(m.size()))
        Fail(ErrorCode::kParse, std::string("checkpoint matrix ") + name + " has the wrong shape");
      size_t k = 0;
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data[k++];
      if (!m.allFinite())
        Fail(ErrorCode::kNumeric, std::string("checkpoint matrix ") + name + " is not finite");
    });
    return model;
  } catch (const json::exception &e) {
    Fail(ErrorCode::kParse, std::string("malformed checkpoint: ") + e.what());
  }
}

void SaveCheckpoint(const Model &model, const std::filesystem::path &path) {
  WriteFileAtomic(path, CheckpointToJson(model).dump() + "\n");
}

Model LoadCheckpoint(const std::filesystem::path &path) {
  json j;
  try {
    j = json::parse(ReadFile(path));
  } catch (const json::exception &e) {
    Fail(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  return CheckpointFromJson(j);
}

}  // namespace fcm
