// Copyright 2026 The PALQO Authors
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

#include "palqo/pinn.hpp"

#include <cmath>
#include <sstream>

#include "palqo/error.hpp"
#include "palqo/format.hpp"
#include "palqo/rng.hpp"

namespace palqo {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::string_view kCheckpointTag = "palqo-mlp v1";

void check_input(const MlpParams& w, Eigen::Index rows) {
  if (static_cast<std::size_t>(rows) != w.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "network expects input length " + std::to_string(w.input_dim()) +
                                                  ", got " + std::to_string(rows));
}

MatrixXd affine(const MatrixXd& w, const VectorXd& b, const MatrixXd& x) {
  MatrixXd z = w * x;
  z.colwise() += b;
  return z;
}

// Activations of a batch whose columns are inputs. a[0] is the input, a[l]
// and s[l] = 1 - a[l]^2 belong to hidden layer l = 1..L.
struct Forward {
  std::vector<MatrixXd> a;
  std::vector<MatrixXd> s;
  MatrixXd y;
};

Forward run_forward(const MlpParams& w, const MatrixXd& x) {
  check_input(w, x.rows());
  const std::size_t L = w.hidden_layers();
  Forward f;
  f.a.resize(L + 1);
  f.s.resize(L + 1);
  f.a[0] = x;
  for (std::size_t l = 1; l <= L; ++l) {
    f.a[l] = affine(w.weights[l - 1], w.biases[l - 1], f.a[l - 1]).array().tanh().matrix();
    f.s[l] = (1.0 - f.a[l].array().square()).matrix();
  }
  f.y = affine(w.weights[L], w.biases[L], f.a[L]);
  return f;
}

// Reverse pass for output 0: beta[l] = d y0 / d a[l], delta[l] = s[l] .* beta[l].
struct Reverse {
  std::vector<MatrixXd> beta;
  std::vector<MatrixXd> delta;
};

Reverse run_reverse(const MlpParams& w, const Forward& f) {
  const std::size_t L = w.hidden_layers();
  const Eigen::Index n = f.a[0].cols();
  Reverse r;
  r.beta.resize(L + 1);
  r.delta.resize(L + 1);
  r.beta[L] = w.weights[L].row(0).transpose().replicate(1, n);
  for (std::size_t l = L; l >= 1; --l) {
    r.delta[l] = f.s[l].cwiseProduct(r.beta[l]);
    r.beta[l - 1] = w.weights[l - 1].transpose() * r.delta[l];
  }
  return r;
}

// Pushes input-space tangents through the hidden layers: u[l] = s[l] .* (W_l u[l-1]).
// Tangent columns pair with sample columns, or all share the single sample.
std::vector<MatrixXd> run_tangent(const MlpParams& w, const Forward& f, const MatrixXd& u0) {
  const std::size_t L = w.hidden_layers();
  const bool shared = f.a[0].cols() == 1;
  std::vector<MatrixXd> u(L + 1);
  u[0] = u0;
  for (std::size_t l = 1; l <= L; ++l) {
    const MatrixXd z = w.weights[l - 1] * u[l - 1];
    u[l] = shared ? MatrixXd(f.s[l].col(0).asDiagonal() * z) : MatrixXd(f.s[l].cwiseProduct(z));
  }
  return u;
}

// Second-order directional pass along input direction v (one per column).
// zd[l] = W_l ad[l-1], ad[l] = s .* zd, zdd[l] = W_l add[l-1],
// add[l] = s .* zdd - 2 a .* s .* zd^2.
struct SecondOrder {
  std::vector<MatrixXd> ad, zd, add, zdd;
  Eigen::RowVectorXd q;  // v^T H v for output 0
};

SecondOrder run_second_order(const MlpParams& w, const Forward& f, const MatrixXd& v) {
  const std::size_t L = w.hidden_layers();
  SecondOrder so;
  so.ad.resize(L + 1);
  so.zd.resize(L + 1);
  so.add.resize(L + 1);
  so.zdd.resize(L + 1);
  so.ad[0] = v;
  so.add[0] = MatrixXd::Zero(v.rows(), v.cols());
  for (std::size_t l = 1; l <= L; ++l) {
    const MatrixXd& W = w.weights[l - 1];
    so.zd[l] = W * so.ad[l - 1];
    so.zdd[l] = l == 1 ? MatrixXd::Zero(W.rows(), v.cols()) : MatrixXd(W * so.add[l - 1]);
    so.ad[l] = f.s[l].cwiseProduct(so.zd[l]);
    so.add[l] = (f.s[l].array() * so.zdd[l].array() -
                 2.0 * f.a[l].array() * f.s[l].array() * so.zd[l].array().square())
                    .matrix();
  }
  so.q = w.weights[L].row(0) * so.add[L];
  return so;
}

struct Batch {
  MatrixXd x;        // inputs, one column per sample
  VectorXd energy;   // energy targets
  MatrixXd theta;    // next-step targets, p x S
};

Batch make_batch(const MlpParams& w, const TrainingSet& s) {
  s.validate();
  const auto n = static_cast<Eigen::Index>(s.size());
  const auto in = s.samples.front().input.size();
  check_input(w, in);
  if (w.output_dim() != static_cast<std::size_t>(in))
    throw Error(ErrorCode::DimensionMismatch, "network output length must equal p + 1");
  Batch b{MatrixXd(in, n), VectorXd(n), MatrixXd(in - 1, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& smp = s.samples[static_cast<std::size_t>(j)];
    b.x.col(j) = smp.input;
    b.energy(j) = smp.energy;
    b.theta.col(j) = smp.theta_next;
  }
  return b;
}

// Every derivative quantity a loss evaluation needs.
struct Eval {
  Forward f;
  Reverse r;
  std::vector<MatrixXd> u;  // time tangent
  MatrixXd jt;              // d y / d t, (p+1) x S
  MatrixXd gx;              // d y0 / d input, (p+1) x S
  SecondOrder so;           // along v = (0, g)
};

Eval evaluate(const MlpParams& w, const MatrixXd& x, bool need_second) {
  Eval e;
  e.f = run_forward(w, x);
  e.r = run_reverse(w, e.f);
  e.gx = e.r.beta[0];
  MatrixXd u0 = MatrixXd::Zero(x.rows(), x.cols());
  u0.row(0).setOnes();
  e.u = run_tangent(w, e.f, u0);
  e.jt = w.weights.back() * e.u.back();
  if (need_second) {
    MatrixXd v = e.gx;
    v.row(0).setZero();
    e.so = run_second_order(w, e.f, v);
  }
  return e;
}

// Residual matrices of the three loss terms.
struct Residuals {
  MatrixXd data;  // (p+1) x S: row 0 energy error, rows 1..p next-step error
  MatrixXd p1;    // 1 x S (summed form) or p x S (per component)
  Eigen::RowVectorXd p2;
};

Residuals residuals(const Eval& e, const Batch& b, bool per_component, double eta, bool need_p2) {
  const Eigen::Index p = b.theta.rows();
  Residuals r;
  r.data.resize(p + 1, b.x.cols());
  r.data.row(0) = e.f.y.row(0) - b.energy.transpose();
  r.data.bottomRows(p) = e.f.y.bottomRows(p) - b.theta;
  const MatrixXd comp = e.jt.bottomRows(p) + e.gx.bottomRows(p);
  r.p1 = per_component ? comp : MatrixXd(comp.colwise().sum());
  if (need_p2)
    r.p2 = e.gx.row(0) + e.gx.bottomRows(p).colwise().squaredNorm() - 0.5 * eta * e.so.q;
  return r;
}

bool use_p2(const PinnConfig& c) { return c.p2_enabled && c.lambda_p2 != 0.0; }

LossBreakdown combine(const Residuals& r, const PinnConfig& c, bool with_p2) {
  LossBreakdown out;
  out.data = r.data.squaredNorm();
  out.p1 = r.p1.squaredNorm();
  out.p2 = with_p2 ? r.p2.squaredNorm() : 0.0;
  out.total = c.lambda_data * out.data + c.lambda_p1 * out.p1 + (c.p2_enabled ? c.lambda_p2 * out.p2 : 0.0);
  return out;
}

void add_outer(MatrixXd& target, const MatrixXd& left, const MatrixXd& right) {
  target.noalias() += left * right.transpose();
}

}  // namespace

std::string_view to_string(InitScheme s) { return s == InitScheme::FanIn ? "fan_in" : "uniform"; }

InitScheme parse_init_scheme(std::string_view text) {
  if (text == "uniform") return InitScheme::Uniform;
  if (text == "fan_in") return InitScheme::FanIn;
  throw Error(ErrorCode::InvalidArgument, "unknown init scheme '" + std::string(text) + "'");
}

MlpParams MlpParams::zeros(std::size_t p, std::size_t width, std::size_t hidden_layers) {
  if (p == 0 || width == 0 || hidden_layers == 0)
    throw Error(ErrorCode::InvalidArgument, "network needs p >= 1, width >= 1 and at least one hidden layer");
  const auto in = static_cast<Eigen::Index>(p + 1);
  const auto W = static_cast<Eigen::Index>(width);
  MlpParams m;
  for (std::size_t l = 0; l <= hidden_layers; ++l) {
    const Eigen::Index rows = l == hidden_layers ? in : W;
    const Eigen::Index cols = l == 0 ? in : W;
    m.weights.push_back(MatrixXd::Zero(rows, cols));
    m.biases.push_back(VectorXd::Zero(rows));
  }
  return m;
}

MlpParams MlpParams::random(std::size_t p, std::size_t width, std::size_t hidden_layers, std::uint64_t seed,
                            InitScheme scheme) {
  MlpParams m = zeros(p, width, hidden_layers);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    CounterRng rng(derive_seed(seed, {0x6d6c70ULL, l}));
    const double bound =
        scheme == InitScheme::FanIn ? 1.0 / std::sqrt(static_cast<double>(m.weights[l].cols())) : 1.0;
    for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) m.weights[l].data()[i] = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) m.biases[l](i) = rng.uniform(-bound, bound);
  }
  return m;
}

std::size_t MlpParams::size() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

bool MlpParams::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  return true;
}

Eigen::VectorXd MlpParams::flatten() const {
  VectorXd out(static_cast<Eigen::Index>(size()));
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.segment(k, weights[l].size()) = weights[l].reshaped();
    k += weights[l].size();
    out.segment(k, biases[l].size()) = biases[l];
    k += biases[l].size();
  }
  return out;
}

void MlpParams::assign(const Eigen::VectorXd& flat) {
  if (static_cast<std::size_t>(flat.size()) != size())
    throw Error(ErrorCode::DimensionMismatch, "flat parameter vector has the wrong length");
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l].reshaped() = flat.segment(k, weights[l].size());
    k += weights[l].size();
    biases[l] = flat.segment(k, biases[l].size());
    k += biases[l].size();
  }
}

void MlpParams::validate() const {
  if (weights.size() < 2 || weights.size() != biases.size())
    throw Error(ErrorCode::DimensionMismatch, "network needs at least one hidden layer and one bias per layer");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != biases[l].size())
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(l) + " bias length mismatch");
    if (l > 0 && weights[l].cols() != weights[l - 1].rows())
      throw Error(ErrorCode::DimensionMismatch, "layer " + std::to_string(l) + " does not chain");
  }
  if (input_dim() != output_dim() || input_dim() < 2)
    throw Error(ErrorCode::DimensionMismatch, "network must map p + 1 inputs to p + 1 outputs");
}

void PinnConfig::validate() const {
  if (!(lambda_data >= 0.0) || !(lambda_p1 >= 0.0) || !(lambda_p2 >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "loss weights must be nonnegative");
  if (hidden_layers < 1) throw Error(ErrorCode::InvalidArgument, "need at least one hidden layer");
  if (width == 0 && width_factor == 0) throw Error(ErrorCode::InvalidArgument, "width must be positive");
  if (!(lr_final > 0.0) || !(lr_initial >= lr_final))
    throw Error(ErrorCode::InvalidArgument, "learning rates need lr_initial >= lr_final > 0");
  if (!std::isfinite(eta_vqe) || eta_vqe < 0.0)
    throw Error(ErrorCode::InvalidArgument, "eta_vqe must be finite and nonnegative");
}

std::size_t TrainingSet::param_dim() const {
  return samples.empty() ? 0 : static_cast<std::size_t>(samples.front().theta_next.size());
}

TrainingSet TrainingSet::from_window(std::span<const TrajectoryRecord> window) {
  if (window.size() < 2) throw Error(ErrorCode::InvalidArgument, "training window needs at least two records");
  TrainingSet s;
  for (std::size_t j = 0; j + 1 < window.size(); ++j) {
    const auto& cur = window[j];
    const auto& next = window[j + 1];
    if (next.step != cur.step + 1)
      throw Error(ErrorCode::InvalidArgument, "training window steps are not consecutive at step " +
                                                  std::to_string(cur.step));
    PinnSample smp;
    smp.input.resize(cur.theta.size() + 1);
    smp.input(0) = kTimeStep * static_cast<double>(j + 1);
    smp.input.tail(cur.theta.size()) = cur.theta;
    smp.energy = cur.energy;
    smp.theta_next = next.theta;
    s.samples.push_back(std::move(smp));
  }
  s.validate();
  return s;
}

void TrainingSet::validate() const {
  if (samples.empty()) throw Error(ErrorCode::InvalidArgument, "training set is empty");
  const auto p = samples.front().theta_next.size();
  if (p < 1) throw Error(ErrorCode::DimensionMismatch, "training targets are empty");
  for (const auto& smp : samples)
    if (smp.input.size() != p + 1 || smp.theta_next.size() != p)
      throw Error(ErrorCode::DimensionMismatch, "training samples have inconsistent parameter lengths");
}

Eigen::VectorXd forward(const MlpParams& w, const Eigen::VectorXd& input) {
  return run_forward(w, input).y.col(0);
}

Eigen::MatrixXd input_jacobian(const MlpParams& w, const Eigen::VectorXd& input) {
  const Forward f = run_forward(w, input);
  const auto n = input.size();
  const auto u = run_tangent(w, f, MatrixXd::Identity(n, n));
  return w.weights.back() * u.back();
}

// H = sum_l Z_l^T diag(beta_l .* (-2 a_l s_l)) Z_l with Z_l the pre-activation
// tangents of layer l along the theta inputs.
Eigen::MatrixXd energy_input_hessian(const MlpParams& w, const Eigen::VectorXd& input) {
  const Forward f = run_forward(w, input);
  const Reverse r = run_reverse(w, f);
  const auto p = input.size() - 1;
  MatrixXd u = MatrixXd::Zero(input.size(), p);
  u.bottomRows(p).setIdentity();
  MatrixXd h = MatrixXd::Zero(p, p);
  for (std::size_t l = 1; l <= w.hidden_layers(); ++l) {
    const MatrixXd z = w.weights[l - 1] * u;
    const VectorXd c =
        (r.beta[l].array() * -2.0 * f.a[l].array() * f.s[l].array()).matrix().col(0);
    h.triangularView<Eigen::Upper>() += z.transpose() * c.asDiagonal() * z;
    u = f.s[l].col(0).asDiagonal() * z;
  }
  h.triangularView<Eigen::StrictlyLower>() = h.transpose();
  return h;
}

Eigen::VectorXd energy_hessian_vector(const MlpParams& w, const Eigen::VectorXd& input, const Eigen::VectorXd& v) {
  if (v.size() + 1 != input.size()) throw Error(ErrorCode::DimensionMismatch, "direction length must be p");
  const Forward f = run_forward(w, input);
  const Reverse r = run_reverse(w, f);
  const std::size_t L = w.hidden_layers();
  VectorXd vin = VectorXd::Zero(input.size());
  vin.tail(v.size()) = v;
  const auto u = run_tangent(w, f, vin);
  // Forward-mode derivative of the reverse pass along vin.
  std::vector<VectorXd> zdot(L + 1);
  for (std::size_t l = 1; l <= L; ++l) zdot[l] = w.weights[l - 1] * u[l - 1];
  VectorXd beta_dot = VectorXd::Zero(w.weights[L].cols());
  for (std::size_t l = L; l >= 1; --l) {
    const auto s_dot = -2.0 * f.a[l].col(0).array() * f.s[l].col(0).array() * zdot[l].array();
    const VectorXd delta_dot =
        (s_dot * r.beta[l].col(0).array() + f.s[l].col(0).array() * beta_dot.array()).matrix();
    beta_dot = w.weights[l - 1].transpose() * delta_dot;
  }
  return beta_dot.tail(v.size());
}

double loss_data(const MlpParams& w, const TrainingSet& s) {
  const Batch b = make_batch(w, s);
  const Forward f = run_forward(w, b.x);
  const auto p = b.theta.rows();
  return (f.y.row(0) - b.energy.transpose()).squaredNorm() + (f.y.bottomRows(p) - b.theta).squaredNorm();
}

double loss_p1(const MlpParams& w, const TrainingSet& s, bool per_component) {
  const Batch b = make_batch(w, s);
  const Eval e = evaluate(w, b.x, false);
  return residuals(e, b, per_component, 0.0, false).p1.squaredNorm();
}

double loss_p2(const MlpParams& w, const TrainingSet& s, double eta_vqe, HessianPath path) {
  const Batch b = make_batch(w, s);
  double total = 0.0;
  for (Eigen::Index j = 0; j < b.x.cols(); ++j) {
    const VectorXd x = b.x.col(j);
    const Eval e = evaluate(w, x, false);
    const VectorXd g = e.gx.col(0).tail(x.size() - 1);
    const double ghg = path == HessianPath::Full ? g.dot(energy_input_hessian(w, x) * g)
                                                 : g.dot(energy_hessian_vector(w, x, g));
    const double r = e.gx(0, 0) + g.squaredNorm() - 0.5 * eta_vqe * ghg;
    total += r * r;
  }
  return total;
}

LossBreakdown total_loss(const MlpParams& w, const TrainingSet& s, const PinnConfig& config) {
  const Batch b = make_batch(w, s);
  const bool p2 = use_p2(config);
  const Eval e = evaluate(w, b.x, p2);
  return combine(residuals(e, b, config.p1_per_component, config.eta_vqe, p2), config, p2);
}

// Reverse-mode sweep over the forward pass, the time tangent, the reverse
// pass for y0 and the second-order pass along (0, g).
LossGradient loss_weight_gradient(const MlpParams& w, const TrainingSet& s, const PinnConfig& config) {
  const Batch b = make_batch(w, s);
  const bool p2 = use_p2(config);
  const Eval e = evaluate(w, b.x, p2);
  const Residuals res = residuals(e, b, config.p1_per_component, config.eta_vqe, p2);

  LossGradient out;
  out.loss = combine(res, config, p2);
  out.grad = w;
  for (std::size_t l = 0; l < w.weights.size(); ++l) {
    out.grad.weights[l].setZero();
    out.grad.biases[l].setZero();
  }

  const std::size_t L = w.hidden_layers();
  const Eigen::Index p = b.theta.rows();
  const Eigen::Index n = b.x.cols();
  const MatrixXd& Wo = w.weights[L];
  MatrixXd& gWo = out.grad.weights[L];

  // Seeds.
  const MatrixXd y_bar = 2.0 * config.lambda_data * res.data;
  MatrixXd jt_bar = MatrixXd::Zero(p + 1, n);
  MatrixXd gx_bar = MatrixXd::Zero(p + 1, n);
  if (config.p1_per_component) {
    jt_bar.bottomRows(p) = 2.0 * config.lambda_p1 * res.p1;
  } else {
    jt_bar.bottomRows(p) = (2.0 * config.lambda_p1 * res.p1).replicate(p, 1);
  }
  gx_bar.bottomRows(p) = jt_bar.bottomRows(p);
  Eigen::RowVectorXd q_bar;
  if (p2) {
    const Eigen::RowVectorXd r2 = 2.0 * config.lambda_p2 * res.p2;
    gx_bar.row(0) += r2;
    gx_bar.bottomRows(p) += 2.0 * e.gx.bottomRows(p) * r2.asDiagonal();
    q_bar = -0.5 * config.eta_vqe * r2;
  }

  std::vector<MatrixXd> s_bar(L + 1), a_bar(L + 1);
  for (std::size_t l = 1; l <= L; ++l) {
    s_bar[l] = MatrixXd::Zero(e.f.s[l].rows(), n);
    a_bar[l] = MatrixXd::Zero(e.f.s[l].rows(), n);
  }

  // Phase A: second-order pass, q = Wo[0,:] add[L].
  if (p2) {
    const SecondOrder& so = e.so;
    gWo.row(0) += q_bar * so.add[L].transpose();
    MatrixXd add_bar = Wo.row(0).transpose() * q_bar;
    MatrixXd ad_bar = MatrixXd::Zero(add_bar.rows(), n);
    for (std::size_t l = L; l >= 1; --l) {
      const auto a = e.f.a[l].array();
      const auto sv = e.f.s[l].array();
      const auto zd = so.zd[l].array();
      const auto abar = add_bar.array();
      const MatrixXd zdd_bar = (abar * sv).matrix();
      MatrixXd zd_bar = (-4.0 * abar * a * sv * zd + ad_bar.array() * sv).matrix();
      s_bar[l].array() += abar * (so.zdd[l].array() - 2.0 * a * zd.square()) + ad_bar.array() * zd;
      a_bar[l].array() += -2.0 * abar * sv * zd.square();
      const MatrixXd& W = w.weights[l - 1];
      MatrixXd& gW = out.grad.weights[l - 1];
      if (l > 1) {
        add_outer(gW, zdd_bar, so.add[l - 1]);
        add_bar = W.transpose() * zdd_bar;
      }
      add_outer(gW, zd_bar, so.ad[l - 1]);
      ad_bar = W.transpose() * zd_bar;
    }
    // ad[0] = (0, g) with g = gx[1..p].
    gx_bar.bottomRows(p) += ad_bar.bottomRows(p);
  }

  // Phase B: time tangent, jt = Wo u[L].
  {
    add_outer(gWo, jt_bar, e.u[L]);
    MatrixXd u_bar = Wo.transpose() * jt_bar;
    for (std::size_t l = L; l >= 1; --l) {
      const MatrixXd z_bar = u_bar.cwiseProduct(e.f.s[l]);
      const MatrixXd zdot = w.weights[l - 1] * e.u[l - 1];
      s_bar[l] += u_bar.cwiseProduct(zdot);
      add_outer(out.grad.weights[l - 1], z_bar, e.u[l - 1]);
      if (l > 1) u_bar = w.weights[l - 1].transpose() * z_bar;
    }
  }

  // Phase C: reverse pass, gx = beta[0].
  {
    MatrixXd beta_bar = gx_bar;
    for (std::size_t l = 1; l <= L; ++l) {
      const MatrixXd& W = w.weights[l - 1];
      add_outer(out.grad.weights[l - 1], e.r.delta[l], beta_bar);
      const MatrixXd delta_bar = W * beta_bar;
      s_bar[l] += delta_bar.cwiseProduct(e.r.beta[l]);
      beta_bar = delta_bar.cwiseProduct(e.f.s[l]);
    }
    gWo.row(0) += beta_bar.rowwise().sum().transpose();
  }

  // Phase D: forward pass.
  {
    add_outer(gWo, y_bar, e.f.a[L]);
    out.grad.biases[L] += y_bar.rowwise().sum();
    a_bar[L] += Wo.transpose() * y_bar;
    for (std::size_t l = L; l >= 1; --l) {
      a_bar[l] += -2.0 * e.f.a[l].cwiseProduct(s_bar[l]);
      const MatrixXd z_bar = a_bar[l].cwiseProduct(e.f.s[l]);
      add_outer(out.grad.weights[l - 1], z_bar, e.f.a[l - 1]);
      out.grad.biases[l - 1] += z_bar.rowwise().sum();
      if (l > 1) a_bar[l - 1] += w.weights[l - 1].transpose() * z_bar;
    }
  }
  return out;
}

MlpParams loss_weight_gradient_fd(const MlpParams& w, const TrainingSet& s, const PinnConfig& config,
                                  double step) {
  VectorXd flat = w.flatten();
  VectorXd grad(flat.size());
  MlpParams probe = w;
  for (Eigen::Index i = 0; i < flat.size(); ++i) {
    const double orig = flat(i);
    flat(i) = orig + step;
    probe.assign(flat);
    const double plus = total_loss(probe, s, config).total;
    flat(i) = orig - step;
    probe.assign(flat);
    const double minus = total_loss(probe, s, config).total;
    flat(i) = orig;
    grad(i) = (plus - minus) / (2.0 * step);
  }
  MlpParams out = w;
  out.assign(grad);
  return out;
}

TrainResult train(MlpParams w0, const TrainingSet& s, const PinnConfig& config) {
  config.validate();
  w0.validate();
  TrainResult out;
  out.params = std::move(w0);
  if (config.epochs == 0) return out;
  MlpParams& w = out.params;
  constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::vector<MatrixXd> mw, vw;
  std::vector<VectorXd> mb, vb;
  for (std::size_t l = 0; l < w.weights.size(); ++l) {
    mw.push_back(MatrixXd::Zero(w.weights[l].rows(), w.weights[l].cols()));
    vw.push_back(mw.back());
    mb.push_back(VectorXd::Zero(w.biases[l].size()));
    vb.push_back(mb.back());
  }
  out.history.reserve(config.epochs);
  double b1t = 1.0, b2t = 1.0;
  for (std::size_t ep = 0; ep < config.epochs; ++ep) {
    const LossGradient lg = loss_weight_gradient(w, s, config);
    if (!std::isfinite(lg.loss.total) || !lg.grad.all_finite())
      throw Error(ErrorCode::NonFinite, "training loss became non-finite at epoch " + std::to_string(ep) +
                                            " (data " + format_double(lg.loss.data) + ", p1 " +
                                            format_double(lg.loss.p1) + ", p2 " + format_double(lg.loss.p2) + ")");
    out.history.push_back(lg.loss);
    const double frac = config.epochs > 1 ? static_cast<double>(ep) / static_cast<double>(config.epochs - 1) : 0.0;
    const double lr = config.lr_initial + (config.lr_final - config.lr_initial) * frac;
    b1t *= beta1;
    b2t *= beta2;
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
      m = beta1 * m + (1.0 - beta1) * g;
      v = beta2 * v + (1.0 - beta2) * g.cwiseProduct(g);
      param.array() -= lr * (m.array() / (1.0 - b1t)) / ((v.array() / (1.0 - b2t)).sqrt() + eps);
    };
    for (std::size_t l = 0; l < w.weights.size(); ++l) {
      update(w.weights[l], mw[l], vw[l], lg.grad.weights[l]);
      update(w.biases[l], mb[l], vb[l], lg.grad.biases[l]);
    }
  }
  return out;
}

std::string save_checkpoint(const MlpParams& w) {
  w.validate();
  std::ostringstream os;
  os << kCheckpointTag << '\n' << "sizes";
  os << ' ' << w.weights.front().cols();
  for (const auto& m : w.weights) os << ' ' << m.rows();
  os << '\n';
  for (std::size_t l = 0; l < w.weights.size(); ++l) {
    const auto& m = w.weights[l];
    os << "layer " << l << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << format_double(m(i, j));
      os << '\n';
    }
    for (Eigen::Index i = 0; i < w.biases[l].size(); ++i) os << (i ? " " : "") << format_double(w.biases[l](i));
    os << '\n';
  }
  return os.str();
}

MlpParams load_checkpoint(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> Error {
    return Error(ErrorCode::Io, "checkpoint line " + std::to_string(line_no) + ": " + what);
  };
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(is, line)) throw fail("unexpected end of file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };
  auto tokens = [&]() {
    std::vector<std::string> out;
    std::istringstream ls(line);
    for (std::string t; ls >> t;) out.push_back(t);
    return out;
  };
  auto to_size = [&](const std::string& t) -> std::size_t {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(t, &pos);
    } catch (const std::exception&) {
      throw fail("expected an integer, got '" + t + "'");
    }
    if (pos != t.size() || v == 0) throw fail("expected a positive integer, got '" + t + "'");
    return static_cast<std::size_t>(v);
  };
  auto to_double = [&](const std::string& t) {
    try {
      return parse_double(t);
    } catch (const Error&) {
      throw fail("malformed number '" + t + "'");
    }
  };

  next_line();
  if (line != kCheckpointTag) throw fail("expected version tag '" + std::string(kCheckpointTag) + "'");
  next_line();
  const auto head = tokens();
  if (head.size() < 4 || head[0] != "sizes") throw fail("expected 'sizes' with at least three layer widths");
  std::vector<std::size_t> sizes;
  for (std::size_t i = 1; i < head.size(); ++i) sizes.push_back(to_size(head[i]));

  MlpParams w;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    next_line();
    if (line != "layer " + std::to_string(l)) throw fail("expected 'layer " + std::to_string(l) + "'");
    const auto rows = static_cast<Eigen::Index>(sizes[l + 1]);
    const auto cols = static_cast<Eigen::Index>(sizes[l]);
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      next_line();
      const auto t = tokens();
      if (static_cast<Eigen::Index>(t.size()) != cols) throw fail("expected " + std::to_string(cols) + " weights");
      for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = to_double(t[static_cast<std::size_t>(j)]);
    }
    next_line();
    const auto t = tokens();
    if (static_cast<Eigen::Index>(t.size()) != rows) throw fail("expected " + std::to_string(rows) + " biases");
    VectorXd b(rows);
    for (Eigen::Index i = 0; i < rows; ++i) b(i) = to_double(t[static_cast<std::size_t>(i)]);
    w.weights.push_back(std::move(m));
    w.biases.push_back(std::move(b));
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw fail("trailing content");
  }
  try {
    w.validate();
  } catch (const Error& err) {
    throw fail(err.what());
  }
  return w;
}

}  // namespace palqo
