#ifndef PROOFRL_POLICY_HPP_
#define PROOFRL_POLICY_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "proofrl/rng.hpp"
#include "proofrl/types.hpp"

namespace proofrl {

// Two-layer perceptron (in_dim -> hidden, tanh -> 1). Weights are flat
// row-major vectors; gradients use the same shape, so an Mlp doubles as a
// gradient accumulator.
struct Mlp {
  int in_dim = 0;
  int hidden_dim = 0;
  std::vector<double> w1;  // hidden_dim x in_dim
  std::vector<double> b1;  // hidden_dim
  std::vector<double> w2;  // hidden_dim
  double b2 = 0.0;

  static Mlp zeros(int in_dim, int hidden_dim);
  // Uniform init in +-1/sqrt(fan_in).
  static Mlp random_init(int in_dim, int hidden_dim, Rng& rng);

  double forward(const std::vector<double>& x) const;
  // Accumulates d(dout * forward(x))/dparams into grad.
  void backward(const std::vector<double>& x, double dout, Mlp& grad) const;

  void add_scaled(const Mlp& g, double scale);  // params += scale * g
  void fill(double v);

  std::size_t param_count() const;
  double get_param(std::size_t i) const;
  void set_param(std::size_t i, double v);
  double max_abs() const;
  bool finite() const;
};

struct PolicyParams {
  Mlp scorer;
};

struct CriticParams {
  Mlp value_head;
};

// Fixed-length featurization, permutation-invariant over all id sets and
// computed in canonical order, so set-equal states featurize identically.
inline constexpr int kStateFeatureDim = 6;
inline constexpr int kActionFeatureDim = 8 + kStateFeatureDim;

std::vector<double> state_features(const State& state);
std::vector<double> action_features(const State& state, const Action& action);

// All premise subsets of the candidates with 2 <= size <= max_arity, in
// deterministic order (arity ascending, then lexicographic over the sorted
// candidate list), followed by End.
std::vector<Action> propose_actions(const State& state, int max_arity);

// One feature row per proposal. Featurization is independent of the
// parameters, so callers that revisit a state (warm-up epochs, buffer
// epochs) compute this once and reuse it.
using FeatureMatrix = std::vector<std::vector<double>>;
FeatureMatrix action_feature_matrix(const State& state,
                                    const std::vector<Action>& proposals);

struct ActionDistribution {
  std::vector<Action> proposals;
  std::vector<double> raw_probs;         // softmax over all proposals
  std::vector<std::size_t> topk;         // indices into proposals, prob desc
  std::vector<double> topk_probs;        // renormalized over topk
  int k = 1;

  double entropy() const;  // of the renormalized distribution
};

// Renormalization of the k most probable entries (ties by index order) so
// they sum to 1. Split out so the arithmetic is testable on bare numbers.
std::pair<std::vector<std::size_t>, std::vector<double>> renormalize_topk(
    const std::vector<double>& raw_probs, int k);

ActionDistribution action_distribution(const PolicyParams& params,
                                       const State& state,
                                       const std::vector<Action>& proposals,
                                       int k);
ActionDistribution action_distribution(const PolicyParams& params,
                                       const FeatureMatrix& features,
                                       const std::vector<Action>& proposals,
                                       int k);

Action sample_action(const ActionDistribution& dist, Rng& rng);

// log prob of `action` under the renormalized distribution; nullopt (or
// ActionPruned for the throwing form) when the action fell outside the
// retained top-k.
std::optional<double> try_logprob(const ActionDistribution& dist,
                                  const Action& action);
double logprob(const PolicyParams& params, const State& state,
               const Action& action, const std::vector<Action>& proposals,
               int k);

double value(const CriticParams& critic, const State& state);

// coefficient * d log pi'(action|state) / d theta, with the top-k selection
// treated as fixed. Throws ActionPruned when the action is not retained.
Mlp policy_grad(const PolicyParams& params, const State& state,
                const Action& action, const std::vector<Action>& proposals,
                int k, double coefficient);

// Same, accumulating into `grad` from a distribution computed earlier over
// the same parameters and feature matrix.
void accumulate_policy_grad(const PolicyParams& params,
                            const FeatureMatrix& features,
                            const ActionDistribution& dist,
                            const Action& action, double coefficient,
                            Mlp& grad);

// coefficient * d entropy(pi'(.|state)) / d theta.
Mlp entropy_grad(const PolicyParams& params, const State& state,
                 const std::vector<Action>& proposals, int k,
                 double coefficient);
void accumulate_entropy_grad(const PolicyParams& params,
                             const FeatureMatrix& features,
                             const ActionDistribution& dist,
                             double coefficient, Mlp& grad);

// coefficient * d V(state) / d critic params.
Mlp value_grad(const CriticParams& critic, const State& state,
               double coefficient);

}  // namespace proofrl

#endif  // PROOFRL_POLICY_HPP_
