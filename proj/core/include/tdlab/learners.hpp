#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tdlab/mdp.hpp"

namespace tdlab {

/// Step sizes and trace parameters shared by all learners. The auxiliary
/// step size is alpha * eta; the ETD(lambda, beta) decay is beta_scale * gamma_t.
struct HyperParams {
  double alpha = 0.01;
  double eta = 1.0;
  double lambda = 0.0;
  double beta_scale = 0.5;

  double alpha_h() const { return alpha * eta; }
};

/// Throws std::invalid_argument unless alpha > 0, eta > 0, lambda and
/// beta_scale in [0, 1].
void validate(const HyperParams& hp);

/**
 * Weights, traces and carried scalars for every learner in the family. A
 * given algorithm touches only the fields it needs; the rest stay zero.
 *
 * `gamma_prev` is the discount of the transition into the current state
 * (gamma_t) and starts at 0; `rho_prev` is rho_{t-1} and starts at 1.
 * `w_prev` holds w_{t-1} for the true-online methods and starts equal to w_0.
 * `w_half` and `h_half` are scratch space for the mirror-prox methods.
 */
struct LearnerState {
  std::vector<double> w;
  std::vector<double> h;
  std::vector<double> e;
  std::vector<double> e_mu;
  std::vector<double> e_o;
  std::vector<double> e_h;
  std::vector<double> w_prev;
  std::vector<double> w_half;
  std::vector<double> h_half;
  double F = 0.0;
  double v_old = 0.0;
  double rho_prev = 1.0;
  double gamma_prev = 0.0;

  std::size_t dim() const { return w.size(); }
};

/// Zero weights and traces of dimension d.
LearnerState make_learner_state(std::size_t d);
/// Primary weights start at `w0`; everything else zero.
LearnerState make_learner_state(std::span<const double> w0);

/// Thrown when a feature vector does not match the learner dimension.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using UpdateFn = void (*)(LearnerState&, const TransitionSample&, std::span<const double> x,
                          std::span<const double> x_next, const HyperParams&);

// Every update consumes one transition (x = x(S_t), x_next = x(S_{t+1})) in
// O(d) time without allocating, and mutates `state` in place.

/// Off-policy TD(0): w += alpha rho delta x.
void td0_update(LearnerState&, const TransitionSample&, std::span<const double>,
                std::span<const double>, const HyperParams&);
/// TD(lambda) with accumulating traces (on-policy).
void td_lambda_update(LearnerState&, const TransitionSample&, std::span<const double>,
                      std::span<const double>, const HyperParams&);
/// True-online TD(lambda) with the dutch trace and the carried v_old.
void totd_update(LearnerState&, const TransitionSample&, std::span<const double>,
                 std::span<const double>, const HyperParams&);
/// GTD(lambda).
void gtd_update(LearnerState&, const TransitionSample&, std::span<const double>,
                std::span<const double>, const HyperParams&);
/// True-online GTD(lambda) with traces e, e_mu and e_h.
void togtd_update(LearnerState&, const TransitionSample&, std::span<const double>,
                  std::span<const double>, const HyperParams&);
/// Provisional TD(lambda).
void ptd_update(LearnerState&, const TransitionSample&, std::span<const double>,
                std::span<const double>, const HyperParams&);
/// Hybrid TD(lambda).
void htd_update(LearnerState&, const TransitionSample&, std::span<const double>,
                std::span<const double>, const HyperParams&);
/// True-online hybrid TD(lambda).
void tohtd_update(LearnerState&, const TransitionSample&, std::span<const double>,
                  std::span<const double>, const HyperParams&);
/// True-online emphatic TD(lambda).
void toetd_update(LearnerState&, const TransitionSample&, std::span<const double>,
                  std::span<const double>, const HyperParams&);
/// True-online emphatic TD(lambda, beta).
void toetd_beta_update(LearnerState&, const TransitionSample&, std::span<const double>,
                       std::span<const double>, const HyperParams&);
/// Emphatic TD(lambda) in its original (non true-online) form.
void etd_update(LearnerState&, const TransitionSample&, std::span<const double>,
                std::span<const double>, const HyperParams&);
/// GTD2(lambda) with a mirror-prox extragradient step.
void gtd2_mp_update(LearnerState&, const TransitionSample&, std::span<const double>,
                    std::span<const double>, const HyperParams&);
/// TDC(lambda) with a mirror-prox extragradient step.
void tdc_mp_update(LearnerState&, const TransitionSample&, std::span<const double>,
                   std::span<const double>, const HyperParams&);

/// Current estimate w^T x.
double predict(const LearnerState& state, std::span<const double> x);

/// Registry entry for one algorithm.
struct Algorithm {
  std::string_view name;
  std::string_view label;
  UpdateFn update;
  /// Only meaningful with on-policy data (no importance weighting).
  bool on_policy_only;
  /// Whether eta (the auxiliary step size) influences the update at all.
  bool uses_eta;
};

/// All thirteen algorithms in canonical order: td0, td, totd, ptd, gtd,
/// togtd, htd, tohtd, etd, toetd, toetd-beta, gtd2-mp, tdc-mp.
std::span<const Algorithm> algorithms();

/// Looks up a canonical name; throws std::invalid_argument listing the valid
/// names otherwise.
const Algorithm& find_algorithm(std::string_view name);

/// Comma-separated list of canonical names.
std::string algorithm_names();

}  // namespace tdlab
