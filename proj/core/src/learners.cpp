#include "tdlab/learners.hpp"

#include <array>
#include <stdexcept>

#include "tdlab/kernels.hpp"

namespace tdlab {

using kernels::axpbz;
using kernels::axpy;
using kernels::copy;
using kernels::dot;
using kernels::scale_add;
using std::span;

void validate(const HyperParams& hp) {
  if (!(hp.alpha > 0.0)) throw std::invalid_argument("hyperparameters: alpha must be > 0");
  if (!(hp.eta > 0.0)) throw std::invalid_argument("hyperparameters: eta must be > 0");
  if (!(hp.lambda >= 0.0 && hp.lambda <= 1.0)) {
    throw std::invalid_argument("hyperparameters: lambda must lie in [0, 1]");
  }
  if (!(hp.beta_scale >= 0.0 && hp.beta_scale <= 1.0)) {
    throw std::invalid_argument("hyperparameters: beta_scale must lie in [0, 1]");
  }
}

LearnerState make_learner_state(std::size_t d) {
  LearnerState st;
  for (auto* v : {&st.w, &st.h, &st.e, &st.e_mu, &st.e_o, &st.e_h, &st.w_prev, &st.w_half,
                  &st.h_half}) {
    v->assign(d, 0.0);
  }
  return st;
}

LearnerState make_learner_state(span<const double> w0) {
  auto st = make_learner_state(w0.size());
  st.w.assign(w0.begin(), w0.end());
  st.w_prev = st.w;
  return st;
}

double predict(const LearnerState& state, span<const double> x) {
  if (x.size() != state.dim()) throw DimensionMismatch("predict: feature dimension mismatch");
  return dot(state.w, x);
}

namespace {

void check_dims(const LearnerState& st, span<const double> x, span<const double> xn) {
  if (x.size() != st.dim() || xn.size() != st.dim()) {
    throw DimensionMismatch("update: feature dimension does not match learner");
  }
}

void advance(LearnerState& st, const TransitionSample& t) {
  st.gamma_prev = t.gamma_next;
  st.rho_prev = t.rho;
}

}  // namespace

void td0_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double delta = t.reward + t.gamma_next * dot(st.w, xn) - dot(st.w, x);
  axpy(hp.alpha * t.rho * delta, x, st.w);
  advance(st, t);
}

void td_lambda_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                      span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double delta = t.reward + t.gamma_next * dot(st.w, xn) - dot(st.w, x);
  scale_add(hp.lambda * st.gamma_prev, st.e, 1.0, x);
  axpy(hp.alpha * delta, st.e, st.w);
  advance(st, t);
}

void totd_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                 span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double v_next = dot(st.w, xn);
  const double v_now = dot(st.w, x);
  const double delta = t.reward + t.gamma_next * v_next - st.v_old;
  const double decay = st.gamma_prev * hp.lambda;
  const double ex = dot(st.e, x);
  scale_add(decay, st.e, hp.alpha * (1.0 - decay * ex), x);
  axpbz(delta, st.e, hp.alpha * (st.v_old - v_now), x, st.w);
  st.v_old = v_next;
  advance(st, t);
}

void gtd_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double delta = t.reward + t.gamma_next * dot(st.w, xn) - dot(st.w, x);
  scale_add(t.rho * hp.lambda * st.gamma_prev, st.e, t.rho, x);
  const double eh = dot(st.e, st.h);
  const double xh = dot(x, st.h);
  axpbz(hp.alpha * delta, st.e, -hp.alpha * t.gamma_next * (1.0 - hp.lambda) * eh, xn, st.w);
  const double ah = hp.alpha_h();
  axpbz(ah * delta, st.e, -ah * xh, x, st.h);
  advance(st, t);
}

void togtd_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                  span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double a = hp.alpha;
  const double ah = hp.alpha_h();
  const double lam = hp.lambda;
  const double g = st.gamma_prev;
  const double rho = t.rho;

  const double v_now = dot(st.w, x);
  const double delta = t.reward + t.gamma_next * dot(st.w, xn) - v_now;
  const double dwx = v_now - dot(st.w_prev, x);

  const double ex = dot(x, st.e);
  scale_add(rho * lam * g, st.e, rho * a * (1.0 - rho * g * lam * ex), x);
  scale_add(rho * lam * g, st.e_mu, rho, x);
  const double ehx = dot(x, st.e_h);
  scale_add(st.rho_prev * lam * g, st.e_h, ah * (1.0 - st.rho_prev * g * lam * ehx), x);

  const double h_emu = dot(st.h, st.e_mu);
  const double xh = dot(x, st.h);

  copy(st.w, st.w_prev);
  // d = delta e + (e - a rho x) dwx
  axpbz(delta + dwx, st.e, -a * rho * dwx, x, st.w);
  axpy(-a * t.gamma_next * (1.0 - lam) * h_emu, xn, st.w);
  axpbz(rho * delta, st.e_h, -ah * xh, x, st.h);
  advance(st, t);
}

void ptd_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double v_now = dot(st.w, x);
  const double v_next = dot(st.w, xn);
  const double delta = t.reward + t.gamma_next * v_next - v_now;
  const double delta_bar = t.reward + v_next - v_now;
  scale_add(t.rho * hp.lambda * st.gamma_prev, st.e, t.rho, x);
  axpbz(hp.alpha * delta, st.e, t.rho - 1.0, st.h, st.w);
  const double decay = st.gamma_prev * hp.lambda;
  scale_add(decay * t.rho, st.h, decay * hp.alpha * delta_bar, st.e);
  advance(st, t);
}

void htd_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double gn = t.gamma_next;
  const double delta = t.reward + gn * dot(st.w, xn) - dot(st.w, x);
  const double decay = hp.lambda * st.gamma_prev;
  scale_add(t.rho * decay, st.e, t.rho, x);
  scale_add(decay, st.e_mu, 1.0, x);

  // (e - e_mu)^T h and e_mu^T h
  const double e_h = dot(st.e, st.h);
  const double emu_h = dot(st.e_mu, st.h);
  const double corr_w = e_h - emu_h;

  // w += a [delta e + (x - g' x') corr_w]
  const double a = hp.alpha;
  axpy(a * delta, st.e, st.w);
  axpbz(a * corr_w, x, -a * corr_w * gn, xn, st.w);
  // h += ah [delta e - (x - g' x') emu_h]
  const double ah = hp.alpha_h();
  axpy(ah * delta, st.e, st.h);
  axpbz(-ah * emu_h, x, ah * emu_h * gn, xn, st.h);
  advance(st, t);
}

void tohtd_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                  span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double a = hp.alpha;
  const double ah = hp.alpha_h();
  const double gn = t.gamma_next;
  const double rho = t.rho;
  const double decay = hp.lambda * st.gamma_prev;

  const double v_now = dot(st.w, x);
  const double delta = t.reward + gn * dot(st.w, xn) - v_now;
  const double dwx = v_now - dot(st.w_prev, x);

  scale_add(rho * decay, st.e, rho, x);
  scale_add(decay, st.e_mu, 1.0, x);
  const double eox = dot(x, st.e_o);
  scale_add(rho * decay, st.e_o, rho * a * (1.0 - rho * decay * eox), x);

  const double e_h = dot(st.e, st.h);
  const double emu_h = dot(st.e_mu, st.h);
  const double corr_w = e_h - emu_h;

  // d = delta e_o + (e_o - a rho x) dwx = (delta + dwx) e_o - a rho dwx x
  const double d_eo = delta + dwx;
  const double d_x = -a * rho * dwx;

  copy(st.w, st.w_prev);
  axpbz(d_eo, st.e_o, d_x + a * corr_w, x, st.w);
  axpy(-a * corr_w * gn, xn, st.w);

  // The auxiliary weights take eta * d so that the alpha_h-scaled forward
  // view holds for every eta (identical to the plain d when eta = 1).
  const double eta = hp.eta;
  axpbz(eta * d_eo, st.e_o, eta * d_x - ah * emu_h, x, st.h);
  axpy(ah * emu_h * gn, xn, st.h);
  advance(st, t);
}

namespace {

void toetd_common(LearnerState& st, const TransitionSample& t, span<const double> x,
                  span<const double> xn, const HyperParams& hp, double follow_on_decay) {
  const double a = hp.alpha;
  const double lam = hp.lambda;
  const double rho = t.rho;
  const double g = st.gamma_prev;

  const double v_now = dot(st.w, x);
  const double delta = t.reward + t.gamma_next * dot(st.w, xn) - v_now;
  const double dwx = v_now - dot(st.w_prev, x);

  st.F = st.rho_prev * follow_on_decay * st.F + t.interest;
  const double M = lam * t.interest + (1.0 - lam) * st.F;

  const double ex = dot(x, st.e);
  scale_add(rho * g * lam, st.e, rho * a * M * (1.0 - rho * g * lam * ex), x);

  copy(st.w, st.w_prev);
  // w += delta e + (e - a M rho x) dwx
  axpbz(delta + dwx, st.e, -a * M * rho * dwx, x, st.w);
  advance(st, t);
}

}  // namespace

void toetd_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                  span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  toetd_common(st, t, x, xn, hp, st.gamma_prev);
}

void toetd_beta_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                       span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  toetd_common(st, t, x, xn, hp, hp.beta_scale * st.gamma_prev);
}

void etd_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double delta = t.reward + t.gamma_next * dot(st.w, xn) - dot(st.w, x);
  st.F = st.rho_prev * st.gamma_prev * st.F + t.interest;
  const double M = hp.lambda * t.interest + (1.0 - hp.lambda) * st.F;
  scale_add(t.rho * st.gamma_prev * hp.lambda, st.e, t.rho * M, x);
  axpy(hp.alpha * delta, st.e, st.w);
  advance(st, t);
}

void gtd2_mp_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                    span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double a = hp.alpha;
  const double ah = hp.alpha_h();
  const double gn = t.gamma_next;
  const double cut = gn * (1.0 - hp.lambda);

  const double delta = t.reward + gn * dot(st.w, xn) - dot(st.w, x);
  scale_add(t.rho * hp.lambda * st.gamma_prev, st.e, t.rho, x);
  const double hx = dot(st.h, x);
  const double he = dot(st.h, st.e);

  copy(st.h, st.h_half);
  axpbz(ah * delta, st.e, -ah * hx, x, st.h_half);
  copy(st.w, st.w_half);
  axpbz(a * hx, x, -a * cut * he, xn, st.w_half);

  const double delta_half = t.reward + gn * dot(st.w_half, xn) - dot(st.w_half, x);
  const double hhx = dot(st.h_half, x);
  const double hhe = dot(st.h_half, st.e);
  axpbz(a * hhx, x, -a * cut * hhe, xn, st.w);
  axpbz(ah * delta_half, st.e, -ah * hhx, x, st.h);
  advance(st, t);
}

void tdc_mp_update(LearnerState& st, const TransitionSample& t, span<const double> x,
                   span<const double> xn, const HyperParams& hp) {
  check_dims(st, x, xn);
  const double a = hp.alpha;
  const double ah = hp.alpha_h();
  const double gn = t.gamma_next;
  const double cut = gn * (1.0 - hp.lambda);

  const double delta = t.reward + gn * dot(st.w, xn) - dot(st.w, x);
  scale_add(t.rho * hp.lambda * st.gamma_prev, st.e, t.rho, x);
  const double hx = dot(st.h, x);
  const double he = dot(st.h, st.e);

  copy(st.h, st.h_half);
  axpbz(ah * delta, st.e, -ah * hx, x, st.h_half);
  copy(st.w, st.w_half);
  axpbz(a * delta, st.e, -a * cut * he, xn, st.w_half);

  const double delta_half = t.reward + gn * dot(st.w_half, xn) - dot(st.w_half, x);
  const double hhx = dot(st.h_half, x);
  const double hhe = dot(st.h_half, st.e);
  axpbz(a * delta_half, st.e, -a * cut * hhe, xn, st.w);
  axpbz(ah * delta_half, st.e, -ah * hhx, x, st.h);
  advance(st, t);
}

namespace {

constexpr std::array<Algorithm, 13> kAlgorithms{{
    {"td0", "TD(0)", &td0_update, false, false},
    {"td", "TD(lambda)", &td_lambda_update, true, false},
    {"totd", "TO-TD(lambda)", &totd_update, true, false},
    {"ptd", "PTD(lambda)", &ptd_update, false, false},
    {"gtd", "GTD(lambda)", &gtd_update, false, true},
    {"togtd", "TO-GTD(lambda)", &togtd_update, false, true},
    {"htd", "HTD(lambda)", &htd_update, false, true},
    {"tohtd", "TO-HTD(lambda)", &tohtd_update, false, true},
    {"etd", "ETD(lambda)", &etd_update, false, false},
    {"toetd", "TO-ETD(lambda)", &toetd_update, false, false},
    {"toetd-beta", "TO-ETD(lambda,beta)", &toetd_beta_update, false, false},
    {"gtd2-mp", "GTD2(lambda)-MP", &gtd2_mp_update, false, true},
    {"tdc-mp", "TDC(lambda)-MP", &tdc_mp_update, false, true},
}};

}  // namespace

std::span<const Algorithm> algorithms() { return kAlgorithms; }

std::string algorithm_names() {
  std::string out;
  for (const auto& alg : kAlgorithms) {
    if (!out.empty()) out += ", ";
    out += alg.name;
  }
  return out;
}

const Algorithm& find_algorithm(std::string_view name) {
  for (const auto& alg : kAlgorithms) {
    if (alg.name == name) return alg;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "'; valid names: " + algorithm_names());
}

}  // namespace tdlab
