// Copyright 2026 The dogvc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/QR>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dogvc/convert.hpp"
#include "dogvc/nets/checkpoint.hpp"

namespace dogvc::convert {

Vector nnls(const Matrix& a, const Vector& b, int max_iterations) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (b.size() != m) throw Error("nnls: dimension mismatch");
  if (max_iterations <= 0) max_iterations = static_cast<int>(3 * n);
  const Vector atb = a.transpose() * b;
  const double tol = 1e-12 * std::max(1.0, atb.cwiseAbs().maxCoeff());
  Vector x = Vector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Vector w = atb;

  auto solve_passive = [&](std::vector<Eigen::Index>& idx) {
    idx.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[j]) idx.push_back(j);
    }
    Matrix sub(m, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    const Vector zp = sub.colPivHouseholderQr().solve(b);
    Vector z = Vector::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Eigen::Index>(k));
    return z;
  };

  std::vector<Eigen::Index> idx;
  for (int outer = 0; outer < max_iterations; ++outer) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[j] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive[best] = true;
    Vector z = solve_passive(idx);
    for (int inner = 0; inner < max_iterations; ++inner) {
      double alpha = std::numeric_limits<double>::infinity();
      for (Eigen::Index j : idx) {
        if (z(j) <= 0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      }
      if (!std::isfinite(alpha)) break;
      x += alpha * (z - x);
      for (Eigen::Index j : idx) {
        if (x(j) <= tol * 1e-3) {
          passive[j] = false;
          x(j) = 0.0;
        }
      }
      z = solve_passive(idx);
    }
    x = z;
    w = atb - a.transpose() * (a * x);
  }
  return x.cwiseMax(0.0);
}

Matrix mel_to_power(const Matrix& log_mel, const Matrix& filterbank) {
  if (log_mel.cols() != filterbank.rows()) {
    throw Error(fmt::format("mel has {} bands, filterbank {}", log_mel.cols(), filterbank.rows()));
  }
  Matrix out(log_mel.rows(), filterbank.cols());
  for (Eigen::Index t = 0; t < log_mel.rows(); ++t) {
    const Vector b = log_mel.row(t).transpose().array().exp();
    out.row(t) = nnls(filterbank, b).transpose();
  }
  return out;
}

std::vector<double> griffin_lim(const Matrix& magnitude, const dsp::StftConfig& stft, const GriffinLimConfig& cfg) {
  stft.validate();
  if (magnitude.cols() != stft.bins()) throw Error("griffin_lim: magnitude width does not match n_fft");
  if (cfg.iterations < 0) throw Error("griffin_lim: negative iteration count");
  const int frames = static_cast<int>(magnitude.rows());
  const std::size_t length = dsp::span_samples(frames, stft);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  ComplexMatrix spec(frames, stft.bins());
  for (int t = 0; t < frames; ++t) {
    for (int b = 0; b < stft.bins(); ++b) spec(t, b) = std::polar(magnitude(t, b), angle(rng));
  }
  dsp::Waveform w{dsp::istft(spec, stft, length), 16000};
  for (int it = 0; it < cfg.iterations; ++it) {
    const auto est = dsp::stft(w, stft).bins;
    for (int t = 0; t < frames; ++t) {
      for (int b = 0; b < stft.bins(); ++b) {
        const double mag = std::abs(est(t, b));
        spec(t, b) = mag > 0 ? est(t, b) * (magnitude(t, b) / mag) : std::complex<double>(magnitude(t, b), 0.0);
      }
    }
    w.samples = dsp::istft(spec, stft, length);
  }
  return w.samples;
}

namespace {

Matrix filterbank_for(const dsp::AnalysisConfig& a) {
  return dsp::mel_filterbank(a.stft.n_fft, a.n_mels, a.fmin, a.fmax, a.sample_rate);
}

void check_mel(const dsp::FeatureSequence& mel, const dsp::AnalysisConfig& a) {
  if (mel.kind != dsp::FeatureKind::melspec) throw Error("mel synthesis needs melspec features");
  if (mel.dim() != a.n_mels) throw Error(fmt::format("mel has {} bands, backend expects {}", mel.dim(), a.n_mels));
  if (mel.num_frames() < 1) throw Error("mel synthesis: no frames");
}

dsp::Waveform finish(std::vector<double> samples, int sample_rate) {
  dsp::Waveform w{std::move(samples), sample_rate};
  for (double v : w.samples) {
    if (!std::isfinite(v)) throw Error("mel synthesis produced non-finite samples");
  }
  limit_peak(w, 0.99);
  return w;
}

}  // namespace

dsp::Waveform phase_reconstruct(const dsp::FeatureSequence& mel, const dsp::AnalysisConfig& analysis,
                                const GriffinLimConfig& gl) {
  check_mel(mel, analysis);
  const Matrix power = mel_to_power(mel.frames, filterbank_for(analysis));
  return finish(griffin_lim(power.cwiseSqrt(), analysis.stft, gl), analysis.sample_rate);
}

// ---------------------------------------------------------------------------

struct NeuralVocoder::Net : nets::ModelBundle {
  nets::NetworkConfig cfg;
  int mels = 0;
  nets::ConvStack stack;
  Vector in_mean, in_std, out_mean, out_std;

  std::string method() const override { return "neural_vocoder"; }
  std::vector<nets::Parameter> parameters() const override { return stack.parameters("vocoder"); }
  nets::NamedStates bn_states() const override { return stack.bn_states("vocoder"); }
  const nets::NetworkConfig& config() const override { return cfg; }
  int feature_dim() const override { return mels; }
};

namespace {

nets::NetworkConfig vocoder_arch(int hidden, int kernel, int bins) {
  nets::NetworkConfig cfg;
  cfg.num_domains = 1;
  auto layer = [](int k, int c, nets::Activation act) {
    nets::LayerSpec s;
    s.kernel = k;
    s.channels.value = c;
    s.activation = act;
    s.same_padding = true;
    return s;
  };
  cfg.specs(nets::Role::generator) = {layer(kernel, hidden, nets::Activation::glu),
                                      layer(kernel, hidden, nets::Activation::glu),
                                      layer(1, bins, nets::Activation::none)};
  return cfg;
}

std::shared_ptr<NeuralVocoder::Net> build_net(const dsp::AnalysisConfig& a, int hidden, int kernel,
                                              std::uint64_t seed) {
  auto net = std::make_shared<NeuralVocoder::Net>();
  net->cfg = vocoder_arch(hidden, kernel, a.stft.bins());
  net->mels = a.n_mels;
  std::mt19937_64 rng(seed);
  net->stack = nets::ConvStack(net->cfg.specs(nets::Role::generator), a.n_mels, a.n_mels, 1, 1, false, rng);
  net->in_mean = Vector::Zero(a.n_mels);
  net->in_std = Vector::Ones(a.n_mels);
  net->out_mean = Vector::Zero(a.stft.bins());
  net->out_std = Vector::Ones(a.stft.bins());
  return net;
}

Matrix standardize(const Matrix& x, const Vector& mean, const Vector& sd) {
  Matrix y = x;
  for (Eigen::Index t = 0; t < y.rows(); ++t) {
    y.row(t) = ((x.row(t).transpose() - mean).array() / sd.array()).matrix().transpose();
  }
  return y;
}

void fit_stats(const std::vector<Matrix>& xs, Vector& mean, Vector& sd) {
  const Eigen::Index d = xs.front().cols();
  Vector s = Vector::Zero(d), sq = Vector::Zero(d);
  double count = 0;
  for (const auto& x : xs) {
    s += x.colwise().sum().transpose();
    sq += x.array().square().matrix().colwise().sum().transpose();
    count += static_cast<double>(x.rows());
  }
  mean = s / count;
  sd = (sq / count - mean.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt().cwiseMax(1e-3);
}

}  // namespace

NeuralVocoder::NeuralVocoder(const dsp::AnalysisConfig& analysis, const Options& opts)
    : analysis_(analysis), opts_(opts), net_(build_net(analysis, opts.hidden, opts.kernel, opts.seed)) {}

double NeuralVocoder::fit(const std::vector<dsp::Waveform>& clips) {
  if (clips.empty()) throw Error("vocoder training needs at least one clip");
  std::vector<Matrix> mels, logs;
  const auto mel_cfg = analysis_.mel();
  for (const auto& w : clips) {
    mels.push_back(dsp::mel_spectrogram(w, mel_cfg).frames);
    logs.push_back(dsp::power(dsp::stft(w, analysis_.stft)).cwiseMax(analysis_.log_floor).array().log().matrix());
  }
  fit_stats(mels, net_->in_mean, net_->in_std);
  fit_stats(logs, net_->out_mean, net_->out_std);
  for (std::size_t i = 0; i < clips.size(); ++i) {
    mels[i] = standardize(mels[i], net_->in_mean, net_->in_std);
    logs[i] = standardize(logs[i], net_->out_mean, net_->out_std);
  }

  const auto params = net_->parameters();
  train::Adam opt(params, opts_.lr);
  std::mt19937_64 rng(opts_.seed);
  std::uniform_int_distribution<std::size_t> pick(0, clips.size() - 1);
  const int bins = analysis_.stft.bins();
  double recent = 0.0;
  int recent_n = 0;
  for (int step = 0; step < opts_.steps; ++step) {
    nets::Tensor x(opts_.batch, analysis_.n_mels, opts_.crop_frames), y(opts_.batch, bins, opts_.crop_frames);
    for (int n = 0; n < opts_.batch; ++n) {
      const std::size_t i = pick(rng);
      const int len = static_cast<int>(mels[i].rows());
      std::uniform_int_distribution<int> start_dist(0, std::max(0, len - opts_.crop_frames));
      const int start = start_dist(rng);
      for (int t = 0; t < opts_.crop_frames; ++t) {
        const int row = (start + t) % len;
        for (int f = 0; f < analysis_.n_mels; ++f) x(n, f, t) = mels[i](row, f);
        for (int f = 0; f < bins; ++f) y(n, f, t) = logs[i](row, f);
      }
    }
    opt.zero_grad();
    nets::Var pred = net_->stack.forward(nets::constant(std::move(x)), nullptr, nets::ForwardMode::train());
    nets::Var loss = nets::l1_loss(pred, nets::constant(std::move(y)));
    nets::backward(loss);
    opt.step(10.0);
    if (step >= opts_.steps - 10) {
      recent += nets::scalar(loss);
      ++recent_n;
    }
  }
  return recent_n ? recent / recent_n : 0.0;
}

Matrix NeuralVocoder::predict_power(const Matrix& log_mel) const {
  if (log_mel.cols() != analysis_.n_mels) {
    throw Error(fmt::format("vocoder expects {} mel bands, got {}", analysis_.n_mels, log_mel.cols()));
  }
  const Matrix x = standardize(log_mel, net_->in_mean, net_->in_std);
  const nets::Var out =
      net_->stack.forward(nets::constant(nets::Tensor::from_matrix(x)), nullptr, nets::ForwardMode::infer());
  Matrix logp = out->value.to_matrix(0);
  for (Eigen::Index t = 0; t < logp.rows(); ++t) {
    logp.row(t) = (logp.row(t).transpose().array() * net_->out_std.array() + net_->out_mean.array()).matrix().transpose();
  }
  return logp.array().exp().matrix();
}

dsp::Waveform NeuralVocoder::synthesize(const dsp::FeatureSequence& mel) const {
  check_mel(mel, analysis_);
  Matrix power = predict_power(mel.frames);
  // Multiplicative non-negative updates pull the prediction toward the
  // input mel bands while keeping its fine structure.
  const Matrix fb = filterbank_for(analysis_);
  for (Eigen::Index t = 0; t < power.rows(); ++t) {
    const Vector b = mel.frames.row(t).transpose().array().exp();
    Vector p = power.row(t).transpose();
    const Vector num = fb.transpose() * b;
    for (int it = 0; it < opts_.refine_iterations; ++it) {
      const Vector den = fb.transpose() * (fb * p);
      p = (p.array() * num.array() / (den.array() + 1e-300)).matrix();
    }
    power.row(t) = p.transpose();
  }
  return finish(griffin_lim(power.cwiseSqrt(), analysis_.stft, opts_.gl), analysis_.sample_rate);
}

namespace {

nlohmann::json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void NeuralVocoder::save(const std::filesystem::path& path) const {
  nlohmann::ordered_json j;
  j["kind"] = "neural_vocoder";
  j["analysis"] = nlohmann::json::parse(analysis_.to_json());
  j["hidden"] = opts_.hidden;
  j["kernel"] = opts_.kernel;
  j["refine_iterations"] = opts_.refine_iterations;
  j["gl_iterations"] = opts_.gl.iterations;
  j["gl_seed"] = opts_.gl.seed;
  j["in_mean"] = vec_json(net_->in_mean);
  j["in_std"] = vec_json(net_->in_std);
  j["out_mean"] = vec_json(net_->out_mean);
  j["out_std"] = vec_json(net_->out_std);
  nets::save_checkpoint(path, *net_, static_cast<std::uint64_t>(opts_.steps), j.dump());
}

NeuralVocoder NeuralVocoder::load(const std::filesystem::path& path) {
  const auto ckpt = nets::read_checkpoint(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ckpt.metadata);
    if (j.at("kind") != "neural_vocoder") throw Error(path.string() + " is not a vocoder checkpoint");
  } catch (const nlohmann::json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
  Options opts;
  opts.hidden = j.at("hidden").get<int>();
  opts.kernel = j.at("kernel").get<int>();
  opts.refine_iterations = j.at("refine_iterations").get<int>();
  opts.gl.iterations = j.at("gl_iterations").get<int>();
  opts.gl.seed = j.at("gl_seed").get<std::uint64_t>();
  NeuralVocoder v(dsp::AnalysisConfig::from_json(j.at("analysis").dump()), opts);
  nets::restore(ckpt, *v.net_);
  v.net_->in_mean = json_vec(j.at("in_mean"));
  v.net_->in_std = json_vec(j.at("in_std"));
  v.net_->out_mean = json_vec(j.at("out_mean"));
  v.net_->out_std = json_vec(j.at("out_std"));
  return v;
}

}  // namespace dogvc::convert
