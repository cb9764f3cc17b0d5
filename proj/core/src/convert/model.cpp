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

#include <cmath>

#include <fmt/format.h>

#include "dogvc/convert.hpp"

namespace dogvc::convert {

std::string to_string(BackendKind k) {
  switch (k) {
    case BackendKind::source_filter: return "source_filter";
    case BackendKind::neural: return "neural";
    case BackendKind::phase_recon: return "phase_recon";
  }
  return "?";
}

BackendKind parse_backend(const std::string& s) {
  if (s == "source_filter") return BackendKind::source_filter;
  if (s == "neural") return BackendKind::neural;
  if (s == "phase_recon") return BackendKind::phase_recon;
  throw Error("unknown backend '" + s + "' (expected source_filter, neural or phase_recon)");
}

bool compatible(BackendKind backend, dsp::FeatureKind features) {
  if (features == dsp::FeatureKind::mcc) return backend == BackendKind::source_filter;
  if (features == dsp::FeatureKind::melspec) return backend != BackendKind::source_filter;
  return false;
}

dsp::FeatureSequence convert_features(const train::TrainedModel& model, const dsp::FeatureSequence& x, int src,
                                      int tgt) {
  const auto& cfg = model.bundle().config();
  for (int label : {src, tgt}) {
    if (label < 0 || label >= cfg.num_domains) {
      throw Error(fmt::format("domain index {} is not in the model's {} domains", label, cfg.num_domains));
    }
  }
  if (x.dim() != model.bundle().feature_dim()) {
    throw Error(fmt::format("model expects {} feature bins, input has {}", model.bundle().feature_dim(), x.dim()));
  }
  const auto mode = nets::ForwardMode::infer();
  const nets::Var in = nets::constant(nets::Tensor::from_matrix(x.frames));
  nets::Var out;
  if (model.stargan) {
    out = model.stargan->generator.forward(in, nets::onehot_batch({tgt}, cfg.num_domains), mode);
  } else {
    const auto& m = *model.acvae;
    const auto post = m.encoder.forward(in, nets::onehot_batch({src}, cfg.num_domains), mode);
    out = m.decoder.forward(post.mean, nets::onehot_batch({tgt}, cfg.num_domains), mode, x.num_frames()).mean;
  }
  dsp::FeatureSequence y = x;
  y.frames = out->value.to_matrix(0);
  return y;
}

dsp::F0Track transform_f0(const dsp::F0Track& f0, const dsp::LogF0Stats& src, const dsp::LogF0Stats& tgt) {
  if (!(src.std > 0)) throw Error("source log-F0 standard deviation is zero");
  dsp::F0Track out = f0;
  for (int t = 0; t < out.num_frames(); ++t) {
    if (!out.voiced[t] || out.f0[t] <= 0) continue;
    out.f0[t] = std::exp((std::log(out.f0[t]) - src.mean) / src.std * tgt.std + tgt.mean);
  }
  return out;
}

}  // namespace dogvc::convert
