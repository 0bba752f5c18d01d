#include "proofrl/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "proofrl/align.hpp"
#include "proofrl/errors.hpp"

namespace proofrl {

Mlp Mlp::zeros(int in_dim, int hidden_dim) {
  Mlp m;
  m.in_dim = in_dim;
  m.hidden_dim = hidden_dim;
  m.w1.assign(static_cast<std::size_t>(in_dim) * hidden_dim, 0.0);
  m.b1.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  m.w2.assign(static_cast<std::size_t>(hidden_dim), 0.0);
  m.b2 = 0.0;
  return m;
}

Mlp Mlp::random_init(int in_dim, int hidden_dim, Rng& rng) {
  Mlp m = zeros(in_dim, hidden_dim);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (double& w : m.w1) w = rng.uniform(-s1, s1);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (double& w : m.w2) w = rng.uniform(-s2, s2);
  return m;
}

double Mlp::forward(const std::vector<double>& x) const {
  double out = b2;
  for (int j = 0; j < hidden_dim; ++j) {
    double z = b1[static_cast<std::size_t>(j)];
    const double* row = &w1[static_cast<std::size_t>(j) * in_dim];
    for (int i = 0; i < in_dim; ++i) z += row[i] * x[static_cast<std::size_t>(i)];
    out += w2[static_cast<std::size_t>(j)] * std::tanh(z);
  }
  return out;
}

void Mlp::backward(const std::vector<double>& x, double dout,
                   Mlp& grad) const {
  for (int j = 0; j < hidden_dim; ++j) {
    double z = b1[static_cast<std::size_t>(j)];
    const double* row = &w1[static_cast<std::size_t>(j) * in_dim];
    for (int i = 0; i < in_dim; ++i) z += row[i] * x[static_cast<std::size_t>(i)];
    const double h = std::tanh(z);
    grad.w2[static_cast<std::size_t>(j)] += dout * h;
    const double dz = dout * w2[static_cast<std::size_t>(j)] * (1.0 - h * h);
    grad.b1[static_cast<std::size_t>(j)] += dz;
    double* grow = &grad.w1[static_cast<std::size_t>(j) * in_dim];
    for (int i = 0; i < in_dim; ++i) grow[i] += dz * x[static_cast<std::size_t>(i)];
  }
  grad.b2 += dout;
}

void Mlp::add_scaled(const Mlp& g, double scale) {
  for (std::size_t i = 0; i < w1.size(); ++i) w1[i] += scale * g.w1[i];
  for (std::size_t i = 0; i < b1.size(); ++i) b1[i] += scale * g.b1[i];
  for (std::size_t i = 0; i < w2.size(); ++i) w2[i] += scale * g.w2[i];
  b2 += scale * g.b2;
}

void Mlp::fill(double v) {
  std::fill(w1.begin(), w1.end(), v);
  std::fill(b1.begin(), b1.end(), v);
  std::fill(w2.begin(), w2.end(), v);
  b2 = v;
}

std::size_t Mlp::param_count() const {
  return w1.size() + b1.size() + w2.size() + 1;
}

double Mlp::get_param(std::size_t i) const {
  if (i < w1.size()) return w1[i];
  i -= w1.size();
  if (i < b1.size()) return b1[i];
  i -= b1.size();
  if (i < w2.size()) return w2[i];
  return b2;
}

void Mlp::set_param(std::size_t i, double v) {
  if (i < w1.size()) { w1[i] = v; return; }
  i -= w1.size();
  if (i < b1.size()) { b1[i] = v; return; }
  i -= b1.size();
  if (i < w2.size()) { w2[i] = v; return; }
  b2 = v;
}

double Mlp::max_abs() const {
  double m = std::abs(b2);
  for (double w : w1) m = std::max(m, std::abs(w));
  for (double w : b1) m = std::max(m, std::abs(w));
  for (double w : w2) m = std::max(m, std::abs(w));
  return m;
}

bool Mlp::finite() const {
  auto ok = [](double v) { return std::isfinite(v); };
  return ok(b2) && std::all_of(w1.begin(), w1.end(), ok) &&
         std::all_of(b1.begin(), b1.end(), ok) &&
         std::all_of(w2.begin(), w2.end(), ok);
}

namespace {

const IdSet* symbols_of(const State& state, const std::string& id) {
  const Sentence* s = find_sentence(state, id);
  return s == nullptr ? nullptr : &s->symbols;
}

}  // namespace

std::vector<double> state_features(const State& state) {
  const IdSet& hyp = state.hypothesis.symbols;
  const double hyp_size = static_cast<double>(std::max<std::size_t>(hyp.size(), 1));

  IdSet derived;
  for (const Step& step : state.steps_so_far) {
    derived = derived.set_union(step.conclusion.symbols);
  }
  const double coverage =
      static_cast<double>(derived.set_intersection(hyp).size()) / hyp_size;

  double best_jaccard = 0.0;
  double exact_match = 0.0;
  for (const std::string& id : state.candidates) {
    const IdSet* syms = symbols_of(state, id);
    if (syms == nullptr) continue;
    best_jaccard = std::max(best_jaccard, jaccard(*syms, hyp));
    if (*syms == hyp) exact_match = 1.0;
  }

  const double n_c = static_cast<double>(state.candidates.size());
  const double n_u = static_cast<double>(state.used.size());
  const double t = static_cast<double>(state.step_index);

  return {coverage,
          best_jaccard,
          exact_match,
          n_c / (n_c + 4.0),
          n_u / (n_u + n_c + 1.0),
          (t - 1.0) / (t + 4.0)};
}

std::vector<double> action_features(const State& state, const Action& action) {
  std::vector<double> f(kActionFeatureDim, 0.0);
  if (action.is_end) {
    f[0] = 1.0;
  } else {
    const IdSet& hyp = state.hypothesis.symbols;
    const double hyp_size =
        static_cast<double>(std::max<std::size_t>(hyp.size(), 1));

    IdSet joint;
    std::vector<const IdSet*> premise_syms;
    std::size_t n_intermediate = 0;
    for (const std::string& id : action.premises) {
      const IdSet* syms = symbols_of(state, id);
      if (syms != nullptr) {
        joint = joint.set_union(*syms);
        premise_syms.push_back(syms);
      }
      if (state.intermediates.contains(id)) ++n_intermediate;
    }

    double pair_overlap = 0.0;
    std::size_t n_pairs = 0;
    for (std::size_t a = 0; a < premise_syms.size(); ++a) {
      for (std::size_t b = a + 1; b < premise_syms.size(); ++b) {
        pair_overlap += jaccard(*premise_syms[a], *premise_syms[b]);
        ++n_pairs;
      }
    }

    const double n_p = static_cast<double>(action.premises.size());
    const double on_hyp =
        static_cast<double>(joint.set_intersection(hyp).size());
    f[1] = n_p / 4.0;
    f[2] = on_hyp / hyp_size;
    f[3] = on_hyp / static_cast<double>(std::max<std::size_t>(joint.size(), 1));
    f[4] = n_pairs ? pair_overlap / static_cast<double>(n_pairs) : 0.0;
    f[5] = n_p / static_cast<double>(
                     std::max<std::size_t>(state.candidates.size(), 1));
    f[6] = joint == hyp ? 1.0 : 0.0;
    f[7] = n_intermediate / std::max(n_p, 1.0);
  }
  const std::vector<double> sf = state_features(state);
  std::copy(sf.begin(), sf.end(), f.begin() + 8);
  return f;
}

std::vector<Action> propose_actions(const State& state, int max_arity) {
  std::vector<Action> proposals;
  const auto& ids = state.candidates.items();
  const std::size_t n = ids.size();
  for (int arity = 2; arity <= max_arity; ++arity) {
    const std::size_t a = static_cast<std::size_t>(arity);
    if (a > n) break;
    // Standard index-combination enumeration in lexicographic order.
    std::vector<std::size_t> comb(a);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      IdSet premises;
      for (const std::size_t i : comb) premises.insert(ids[i]);
      proposals.push_back(Action::reason(std::move(premises)));
      std::size_t j = a;
      while (j > 0 && comb[j - 1] == n - a + (j - 1)) --j;
      if (j == 0) break;
      ++comb[j - 1];
      for (std::size_t l = j; l < a; ++l) comb[l] = comb[l - 1] + 1;
    }
  }
  proposals.push_back(Action::end());
  return proposals;
}

std::pair<std::vector<std::size_t>, std::vector<double>> renormalize_topk(
    const std::vector<double>& raw_probs, int k) {
  const std::size_t kept = std::min<std::size_t>(
      raw_probs.size(), static_cast<std::size_t>(std::max(k, 1)));
  std::vector<std::size_t> order(raw_probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return raw_probs[a] > raw_probs[b];
                   });
  order.resize(kept);

  double total = 0.0;
  for (const std::size_t i : order) total += raw_probs[i];
  std::vector<double> probs;
  probs.reserve(kept);
  for (const std::size_t i : order) probs.push_back(raw_probs[i] / total);
  return {std::move(order), std::move(probs)};
}

FeatureMatrix action_feature_matrix(const State& state,
                                    const std::vector<Action>& proposals) {
  FeatureMatrix features;
  features.reserve(proposals.size());
  for (const Action& a : proposals) {
    features.push_back(action_features(state, a));
  }
  return features;
}

namespace {

std::vector<double> softmax(const std::vector<double>& logits) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - zmax);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

}  // namespace

double ActionDistribution::entropy() const {
  double h = 0.0;
  for (const double p : topk_probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

ActionDistribution action_distribution(const PolicyParams& params,
                                       const FeatureMatrix& features,
                                       const std::vector<Action>& proposals,
                                       int k) {
  std::vector<double> logits;
  logits.reserve(features.size());
  for (const auto& row : features) {
    logits.push_back(params.scorer.forward(row));
  }
  ActionDistribution dist;
  dist.proposals = proposals;
  dist.k = k;
  dist.raw_probs = softmax(logits);
  auto [topk, probs] = renormalize_topk(dist.raw_probs, k);
  dist.topk = std::move(topk);
  dist.topk_probs = std::move(probs);
  return dist;
}

ActionDistribution action_distribution(const PolicyParams& params,
                                       const State& state,
                                       const std::vector<Action>& proposals,
                                       int k) {
  return action_distribution(params, action_feature_matrix(state, proposals),
                             proposals, k);
}

Action sample_action(const ActionDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.topk.size(); ++i) {
    acc += dist.topk_probs[i];
    if (u < acc) return dist.proposals[dist.topk[i]];
  }
  return dist.proposals[dist.topk.back()];
}

std::optional<double> try_logprob(const ActionDistribution& dist,
                                  const Action& action) {
  for (std::size_t i = 0; i < dist.topk.size(); ++i) {
    if (dist.proposals[dist.topk[i]] == action) {
      return std::log(dist.topk_probs[i]);
    }
  }
  return std::nullopt;
}

double logprob(const PolicyParams& params, const State& state,
               const Action& action, const std::vector<Action>& proposals,
               int k) {
  const auto lp = try_logprob(action_distribution(params, state, proposals, k),
                              action);
  if (!lp) throw ActionPruned("action fell outside the retained top-k");
  return *lp;
}

double value(const CriticParams& critic, const State& state) {
  return critic.value_head.forward(state_features(state));
}

void accumulate_policy_grad(const PolicyParams& params,
                            const FeatureMatrix& features,
                            const ActionDistribution& dist,
                            const Action& action, double coefficient,
                            Mlp& grad) {
  std::size_t chosen = dist.topk.size();
  for (std::size_t i = 0; i < dist.topk.size(); ++i) {
    if (dist.proposals[dist.topk[i]] == action) {
      chosen = i;
      break;
    }
  }
  if (chosen == dist.topk.size()) {
    throw ActionPruned("action fell outside the retained top-k");
  }
  if (coefficient == 0.0) return;

  // log pi'(a) = z_a - log sum_{j in topk} exp(z_j): the full-softmax
  // normalizer cancels, so d log pi'(a)/dz_i = [i == a] - pi'_i on the
  // retained set and 0 elsewhere (selection held fixed).
  for (std::size_t i = 0; i < dist.topk.size(); ++i) {
    const double d = (i == chosen ? 1.0 : 0.0) - dist.topk_probs[i];
    params.scorer.backward(features[dist.topk[i]], coefficient * d, grad);
  }
}

Mlp policy_grad(const PolicyParams& params, const State& state,
                const Action& action, const std::vector<Action>& proposals,
                int k, double coefficient) {
  const FeatureMatrix features = action_feature_matrix(state, proposals);
  const ActionDistribution dist =
      action_distribution(params, features, proposals, k);
  Mlp grad = Mlp::zeros(params.scorer.in_dim, params.scorer.hidden_dim);
  accumulate_policy_grad(params, features, dist, action, coefficient, grad);
  return grad;
}

void accumulate_entropy_grad(const PolicyParams& params,
                             const FeatureMatrix& features,
                             const ActionDistribution& dist,
                             double coefficient, Mlp& grad) {
  if (coefficient == 0.0) return;
  const double h = dist.entropy();
  // dH/dz_i = -pi'_i (log pi'_i + H) on the retained set.
  for (std::size_t i = 0; i < dist.topk.size(); ++i) {
    const double p = dist.topk_probs[i];
    const double d = -p * (std::log(p) + h);
    params.scorer.backward(features[dist.topk[i]], coefficient * d, grad);
  }
}

Mlp entropy_grad(const PolicyParams& params, const State& state,
                 const std::vector<Action>& proposals, int k,
                 double coefficient) {
  const FeatureMatrix features = action_feature_matrix(state, proposals);
  const ActionDistribution dist =
      action_distribution(params, features, proposals, k);
  Mlp grad = Mlp::zeros(params.scorer.in_dim, params.scorer.hidden_dim);
  accumulate_entropy_grad(params, features, dist, coefficient, grad);
  return grad;
}

Mlp value_grad(const CriticParams& critic, const State& state,
               double coefficient) {
  Mlp grad = Mlp::zeros(critic.value_head.in_dim, critic.value_head.hidden_dim);
  critic.value_head.backward(state_features(state), coefficient, grad);
  return grad;
}

}  // namespace proofrl
