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
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "dogvc/convert.hpp"

namespace dogvc::convert {

std::string Provenance::to_json() const {
  nlohmann::ordered_json j;
  j["input_sha256"] = input_sha256;
  j["checkpoint_sha256"] = checkpoint_sha256;
  j["vocoder_sha256"] = vocoder_sha256;
  j["method"] = method;
  j["features"] = features;
  j["backend"] = backend;
  j["source"] = source;
  j["target"] = target;
  j["analysis_hash"] = analysis_hash;
  j["arch_hash"] = arch_hash;
  j["kernel_delta"] = kernel_delta;
  j["checkpoint_step"] = checkpoint_step;
  j["seed"] = seed;
  j["gl_iterations"] = gl_iterations;
  return j.dump(2);
}

Provenance Provenance::from_json(const std::string& text) {
  Provenance p;
  try {
    const auto j = nlohmann::json::parse(text);
    p.input_sha256 = j.at("input_sha256").get<std::string>();
    p.checkpoint_sha256 = j.at("checkpoint_sha256").get<std::string>();
    p.vocoder_sha256 = j.at("vocoder_sha256").get<std::string>();
    p.method = j.at("method").get<std::string>();
    p.features = j.at("features").get<std::string>();
    p.backend = j.at("backend").get<std::string>();
    p.source = j.at("source").get<std::string>();
    p.target = j.at("target").get<std::string>();
    p.analysis_hash = j.at("analysis_hash").get<std::string>();
    p.arch_hash = j.at("arch_hash").get<std::string>();
    p.kernel_delta = j.at("kernel_delta").get<int>();
    p.checkpoint_step = j.at("checkpoint_step").get<std::uint64_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.gl_iterations = j.at("gl_iterations").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("provenance: ") + e.what());
  }
  return p;
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(fmt::format("{}: {}", name, e.what()));
  }
}

dsp::FeatureSequence normalize(const train::ModelMetadata& meta, int slot, const dsp::FeatureSequence& x,
                               bool inverse) {
  const auto& st = meta.norm.at(static_cast<std::size_t>(slot));
  if (st.mean.size() == 0) {
    throw Error(fmt::format("domain {} had no training data", meta.domains.at(slot).name));
  }
  return inverse ? dsp::invert_norm(st, x) : dsp::apply_norm(st, x);
}

}  // namespace

ConversionResult convert_waveform(const dsp::Waveform& waveform, const train::LoadedModel& model,
                                  const ConversionRequest& req, const NeuralVocoder* vocoder) {
  const auto& meta = model.meta;
  const auto& analysis = meta.analysis;
  if (!compatible(req.backend, meta.feature_kind)) {
    throw Error(fmt::format("backend {} cannot synthesize {} features", to_string(req.backend),
                            dsp::to_string(meta.feature_kind)));
  }
  if (req.backend == BackendKind::neural && !vocoder) throw Error("the neural backend needs vocoder weights");
  if (vocoder && vocoder->n_mels() != meta.feature_dim) {
    throw Error(fmt::format("vocoder expects {} mel bands, model produces {}", vocoder->n_mels(), meta.feature_dim));
  }
  const int src = stage("domains", [&] { return meta.domains.index_of(req.source); });
  const int tgt = stage("domains", [&] { return meta.domains.index_of(req.target); });

  ConversionResult result;
  auto& prov = result.provenance;
  prov.input_sha256 = sha256_hex(dsp::encode_wav(waveform));
  prov.method = train::to_string(meta.method);
  prov.features = dsp::to_string(meta.feature_kind);
  prov.backend = to_string(req.backend);
  prov.source = req.source;
  prov.target = req.target;
  prov.analysis_hash = hex64(analysis.hash());
  prov.arch_hash = hex64(model.model.bundle().config().hash(meta.feature_dim));
  prov.kernel_delta = meta.kernel_delta;
  prov.checkpoint_step = model.step;
  prov.seed = req.seed;

  const dsp::Waveform input = stage("analysis", [&] {
    waveform.validate();
    return waveform.sample_rate == analysis.sample_rate ? waveform : dsp::resample(waveform, analysis.sample_rate);
  });

  if (meta.feature_kind == dsp::FeatureKind::mcc) {
    const auto sf = stage("analysis", [&] { return dsp::analyze_source_filter(input, analysis); });
    const auto mcc = stage("conversion", [&] {
      auto y = convert_features(model.model, normalize(meta, src, sf.mcc, false), src, tgt);
      return normalize(meta, tgt, y, true);
    });
    dsp::F0Track f0 = sf.f0;
    const auto& ls = meta.log_f0;
    if (ls.size() == static_cast<std::size_t>(meta.domains.size()) && ls[src].frames > 0 && ls[tgt].frames > 0 &&
        ls[src].std > 0) {
      f0 = stage("conversion", [&] { return transform_f0(sf.f0, ls[src], ls[tgt]); });
    } else {
      spdlog::warn("no log-F0 statistics for {} -> {}; keeping source F0", req.source, req.target);
    }
    result.audio = stage("synthesis", [&] {
      SynthesisConfig sc;
      sc.sample_rate = analysis.sample_rate;
      sc.stft = analysis.stft;
      sc.seed = req.seed;
      return synthesize_source_filter(mcc, f0, sf.aperiodicity, sc);
    });
  } else {
    const auto mel = stage("analysis", [&] { return dsp::extract_features(input, dsp::FeatureKind::melspec, analysis); });
    const auto converted = stage("conversion", [&] {
      auto y = convert_features(model.model, normalize(meta, src, mel, false), src, tgt);
      return normalize(meta, tgt, y, true);
    });
    result.audio = stage("synthesis", [&] {
      if (req.backend == BackendKind::neural) return vocoder->synthesize(converted);
      return phase_reconstruct(converted, analysis, GriffinLimConfig{60, req.seed});
    });
    prov.gl_iterations = 60;
  }
  if (!req.checkpoint.empty() && std::filesystem::exists(req.checkpoint)) {
    prov.checkpoint_sha256 = sha256_hex(read_file(req.checkpoint));
  }
  if (req.vocoder && std::filesystem::exists(*req.vocoder)) prov.vocoder_sha256 = sha256_hex(read_file(*req.vocoder));
  return result;
}

ConversionResult convert_file(const ConversionRequest& req) {
  const auto model = stage("checkpoint", [&] { return train::load_model(req.checkpoint); });
  std::optional<NeuralVocoder> vocoder;
  if (req.backend == BackendKind::neural) {
    if (!req.vocoder) throw Error("vocoder: the neural backend needs --vocoder");
    vocoder.emplace(stage("vocoder", [&] { return NeuralVocoder::load(*req.vocoder); }));
  }
  const auto bytes = stage("input", [&] { return read_file(req.input); });
  const auto wav = stage("input", [&] { return dsp::decode_wav(bytes); });
  auto result = convert_waveform(wav, model, req, vocoder ? &*vocoder : nullptr);
  result.provenance.input_sha256 = sha256_hex(bytes);
  return result;
}

void write_result(const std::filesystem::path& out, const ConversionResult& result) {
  write_file_atomic(out, dsp::encode_wav(result.audio));
  auto sidecar = out;
  sidecar += ".json";
  write_file_atomic(sidecar, result.provenance.to_json() + "\n");
}

}  // namespace dogvc::convert
