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

#include "dogvc/train.hpp"

namespace dogvc::train {

using nets::ForwardMode;
using nets::Tensor;
using nets::Var;

double LossReport::at(const std::string& name) const {
  const auto it = terms.find(name);
  if (it == terms.end()) throw Error("loss report has no term '" + name + "'");
  return it->second;
}

void LossReport::require_finite() const {
  bool ok = true;
  for (const auto& [k, v] : terms) ok = ok && std::isfinite(v);
  if (ok) return;
  std::string msg = fmt::format("non-finite loss at step {}:", step);
  for (const auto& [k, v] : terms) msg += fmt::format(" {}={}", k, v);
  throw Error(msg);
}

namespace {

void check_batch(const Batch& batch, int num_domains) {
  if (batch.x.n() != static_cast<int>(batch.labels.size())) throw Error("batch labels do not match batch size");
  for (int l : batch.labels) {
    if (l < 0 || l >= num_domains) throw Error(fmt::format("label {} outside {} domains", l, num_domains));
  }
}

LossGraph finish(std::vector<std::pair<std::string, Var>> terms, const std::vector<double>& weights,
                 std::size_t weighted_count) {
  std::vector<Var> vars;
  LossGraph g;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    g.report.terms[terms[i].first] = nets::scalar(terms[i].second);
    if (i < weighted_count) vars.push_back(terms[i].second);
  }
  g.total = nets::weighted_sum(vars, weights);
  g.report.terms["total"] = nets::scalar(g.total);
  return g;
}

}  // namespace

LossGraph acvae_loss(const Batch& batch, const nets::AcvaeNets& nets, const LossWeights& w, const Tensor& eps,
                     const std::vector<int>& swapped, ForwardMode mode) {
  const int domains = nets.cfg.num_domains;
  check_batch(batch, domains);
  if (swapped.size() != batch.labels.size()) throw Error("swapped labels do not match batch size");
  const int frames = batch.x.t();
  const Tensor src = nets::onehot_batch(batch.labels, domains);
  const Tensor other = nets::onehot_batch(swapped, domains);

  Var x = nets::constant(batch.x);
  const auto post = nets.encoder.forward(x, src, mode);
  Var z = nets::reparameterize(post.mean, post.logvar, eps);
  const auto recon = nets.decoder.forward(z, src, mode, frames);
  const auto swap = nets.decoder.forward(z, other, mode, frames);

  Var nll = nets::gaussian_nll(x, recon.mean, recon.logvar);
  Var kl = nets::kl_standard_normal(post.mean, post.logvar);
  Var aux_recon = nets::softmax_cross_entropy(nets.aux_classifier.logits(recon.mean, mode), batch.labels);
  Var aux_swap = nets::softmax_cross_entropy(nets.aux_classifier.logits(swap.mean, mode), swapped);
  Var aux = nets::scale(nets::add(aux_recon, aux_swap), 0.5);
  Var cls_real = nets::softmax_cross_entropy(nets.aux_classifier.logits(x, mode), batch.labels);

  return finish({{"recon", nll}, {"kl", kl}, {"aux", aux}, {"cls_real", cls_real}}, {1.0, w.kl, w.aux, w.aux}, 4);
}

namespace {

GeneratorFn resolve(const GeneratorFn& gen, const nets::StarGanNets& nets, ForwardMode mode) {
  if (gen) return gen;
  return [&nets, mode](const Var& x, const Tensor& onehot) { return nets.generator.forward(x, onehot, mode); };
}

}  // namespace

LossGraph stargan_critic_loss(const Batch& batch, const std::vector<int>& targets, const nets::StarGanNets& nets,
                              const LossWeights& w, ForwardMode mode, const GeneratorFn& gen) {
  const int domains = nets.cfg.num_domains;
  check_batch(batch, domains);
  if (targets.size() != batch.labels.size()) throw Error("target labels do not match batch size");
  const Tensor src = nets::onehot_batch(batch.labels, domains);
  const Tensor tgt = nets::onehot_batch(targets, domains);
  const auto g = resolve(gen, nets, ForwardMode{mode.training, false});

  Var x = nets::constant(batch.x);
  Var fake = nets::constant(g(x, tgt)->value);
  Var real_loss = nets::bce_with_logits(nets.discriminator.forward(x, src, mode), 1.0);
  Var fake_loss = nets::bce_with_logits(nets.discriminator.forward(fake, tgt, mode), 0.0);
  Var adv_d = nets::add(real_loss, fake_loss);
  Var cls_real = nets::softmax_cross_entropy(nets.classifier.logits(x, mode), batch.labels);
  return finish({{"adv_d", adv_d}, {"cls_real", cls_real}}, {1.0, w.cls}, 2);
}

LossGraph stargan_generator_loss(const Batch& batch, const std::vector<int>& targets, const nets::StarGanNets& nets,
                                 const LossWeights& w, ForwardMode mode, const GeneratorFn& gen) {
  const int domains = nets.cfg.num_domains;
  check_batch(batch, domains);
  if (targets.size() != batch.labels.size()) throw Error("target labels do not match batch size");
  const Tensor src = nets::onehot_batch(batch.labels, domains);
  const Tensor tgt = nets::onehot_batch(targets, domains);
  const auto g = resolve(gen, nets, mode);
  const ForwardMode critic{mode.training, false};

  Var x = nets::constant(batch.x);
  Var fake = g(x, tgt);
  Var adv_g = nets::bce_with_logits(nets.discriminator.forward(fake, tgt, critic), 1.0);
  Var cls_fake = nets::softmax_cross_entropy(nets.classifier.logits(fake, critic), targets);
  Var cycle = nets::l1_loss(g(fake, src), x);
  Var identity = nets::l1_loss(g(x, src), x);
  return finish({{"adv_g", adv_g}, {"cls_fake", cls_fake}, {"cycle", cycle}, {"identity", identity}},
                {1.0, w.cls, w.cyc, w.id}, 4);
}

}  // namespace dogvc::train
