#include "camcover/net.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "camcover/rng.hpp"

namespace camcover::net {

std::string Topology::describe() const {
  std::ostringstream os;
  os << "agents=" << n_agents << " obs=" << obs_dim << " extra=" << extra_dim
     << " enc=" << enc1 << "/" << enc2 << " trunk=" << trunk
     << " hidden=" << hidden;
  return os.str();
}

void Topology::validate() const {
  if (n_agents < 1 || obs_dim < 1 || extra_dim < 0 || enc1 < 1 || enc2 < 1 ||
      trunk < 1 || hidden < 1)
    throw std::invalid_argument("invalid network topology: " + describe());
}

namespace {

void fill_uniform(Eigen::MatrixXd& w, int fan_in, Rng& rng) {
  const double limit = std::sqrt(3.0 / fan_in);
  for (Eigen::Index c = 0; c < w.cols(); ++c)
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      w(r, c) = rng.uniform(-limit, limit);
}

inline Eigen::MatrixXd relu(const Eigen::MatrixXd& x) {
  return x.cwiseMax(0.0);
}

inline Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& x) {
  return ((-x.array()).exp() + 1.0).inverse().matrix();
}

}  // namespace

NetworkParams init_params(const Topology& topo, std::uint64_t seed) {
  topo.validate();
  Rng rng(seed);

  NetworkParams p;
  p.topo = topo;

  p.w1.resize(topo.enc1, topo.obs_dim);
  p.w2.resize(topo.enc2, topo.enc1);
  p.w3.resize(topo.trunk, topo.concat_dim());
  fill_uniform(p.w1, topo.obs_dim, rng);
  fill_uniform(p.w2, topo.enc1, rng);
  fill_uniform(p.w3, topo.concat_dim(), rng);
  p.b1 = Eigen::VectorXd::Zero(topo.enc1);
  p.b2 = Eigen::VectorXd::Zero(topo.enc2);
  p.b3 = Eigen::VectorXd::Zero(topo.trunk);

  for (Eigen::MatrixXd* w : {&p.gz_w, &p.gr_w, &p.gc_w}) {
    w->resize(topo.hidden, topo.trunk);
    fill_uniform(*w, topo.trunk, rng);
  }
  for (Eigen::MatrixXd* u : {&p.gz_u, &p.gr_u, &p.gc_u}) {
    u->resize(topo.hidden, topo.hidden);
    fill_uniform(*u, topo.hidden, rng);
  }
  p.gz_b = Eigen::VectorXd::Zero(topo.hidden);
  p.gr_b = Eigen::VectorXd::Zero(topo.hidden);
  p.gc_b = Eigen::VectorXd::Zero(topo.hidden);

  for (int b = 0; b < Topology::kBranches; ++b) {
    p.head_w[b].resize(Topology::kActionsPerBranch, topo.hidden);
    fill_uniform(p.head_w[b], topo.hidden, rng);
    p.head_b[b] = Eigen::VectorXd::Zero(Topology::kActionsPerBranch);
  }
  return p;
}

NetworkParams zeros_like(const NetworkParams& params) {
  NetworkParams z = params;
  for (auto view : tensor_views(z)) view.setZero();
  return z;
}

namespace {

template <typename P, typename V>
std::vector<V> views_impl(P& p) {
  std::vector<V> out;
  out.reserve(18);
  auto add = [&out](auto& m) { out.emplace_back(m.data(), m.size()); };
  add(p.w1);
  add(p.b1);
  add(p.w2);
  add(p.b2);
  add(p.w3);
  add(p.b3);
  add(p.gz_w);
  add(p.gz_u);
  add(p.gz_b);
  add(p.gr_w);
  add(p.gr_u);
  add(p.gr_b);
  add(p.gc_w);
  add(p.gc_u);
  add(p.gc_b);
  for (int b = 0; b < Topology::kBranches; ++b) {
    add(p.head_w[b]);
    add(p.head_b[b]);
  }
  return out;
}

}  // namespace

std::vector<Eigen::Map<Eigen::VectorXd>> tensor_views(NetworkParams& p) {
  return views_impl<NetworkParams, Eigen::Map<Eigen::VectorXd>>(p);
}

std::vector<Eigen::Map<const Eigen::VectorXd>> tensor_views(
    const NetworkParams& p) {
  return views_impl<const NetworkParams, Eigen::Map<const Eigen::VectorXd>>(p);
}

std::int64_t parameter_count(const NetworkParams& p) {
  std::int64_t n = 0;
  for (const auto& view : tensor_views(p)) n += view.size();
  return n;
}

namespace {

// Trunk input layout per stream column (query agent q of world b):
//   [ encoded block of q | extras of q | encoded blocks of all j != q,
//     ascending j ]
Eigen::MatrixXd assemble_trunk_input(const Topology& topo,
                                     const Eigen::MatrixXd& e2,
                                     const Eigen::MatrixXd& extras) {
  const int n = topo.n_agents;
  const Eigen::Index cols = e2.cols();
  const Eigen::Index worlds = cols / n;
  Eigen::MatrixXd x3(topo.concat_dim(), cols);
  for (Eigen::Index b = 0; b < worlds; ++b) {
    for (int q = 0; q < n; ++q) {
      const Eigen::Index col = b * n + q;
      x3.col(col).segment(0, topo.enc2) = e2.col(col);
      x3.col(col).segment(topo.enc2, topo.extra_dim) = extras.col(col);
      int slot = 0;
      for (int j = 0; j < n; ++j) {
        if (j == q) continue;
        x3.col(col).segment(topo.enc2 + topo.extra_dim + slot * topo.enc2,
                            topo.enc2) = e2.col(b * n + j);
        ++slot;
      }
    }
  }
  return x3;
}

// Adjoint of assemble_trunk_input: scatter trunk-input gradients back onto
// the per-agent encoder outputs.
Eigen::MatrixXd scatter_trunk_gradient(const Topology& topo,
                                       const Eigen::MatrixXd& dx3) {
  const int n = topo.n_agents;
  const Eigen::Index cols = dx3.cols();
  const Eigen::Index worlds = cols / n;
  Eigen::MatrixXd de2 = Eigen::MatrixXd::Zero(topo.enc2, cols);
  for (Eigen::Index b = 0; b < worlds; ++b) {
    for (int q = 0; q < n; ++q) {
      const Eigen::Index col = b * n + q;
      de2.col(col) += dx3.col(col).segment(0, topo.enc2);
      int slot = 0;
      for (int j = 0; j < n; ++j) {
        if (j == q) continue;
        de2.col(b * n + j) += dx3.col(col).segment(
            topo.enc2 + topo.extra_dim + slot * topo.enc2, topo.enc2);
        ++slot;
      }
    }
  }
  return de2;
}

}  // namespace

ForwardResult forward_sequence(const NetworkParams& params,
                               const std::vector<StepInput>& steps,
                               const Eigen::MatrixXd& hidden0,
                               bool want_trace) {
  const Topology& topo = params.topo;
  ForwardResult res;
  res.q.resize(steps.size());
  if (want_trace) res.trace.resize(steps.size());

  Eigen::MatrixXd h = hidden0;
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const StepInput& in = steps[t];
    if (in.blocks.rows() != topo.obs_dim ||
        in.extras.rows() != topo.extra_dim ||
        in.blocks.cols() != in.extras.cols() ||
        in.blocks.cols() % topo.n_agents != 0 || in.blocks.cols() == 0)
      throw std::invalid_argument("step input shape mismatches topology");
    if (h.rows() != topo.hidden || h.cols() != in.blocks.cols())
      throw std::invalid_argument("hidden state shape mismatches input");

    Eigen::MatrixXd e1 =
        relu((params.w1 * in.blocks).colwise() + params.b1);
    Eigen::MatrixXd e2 = relu((params.w2 * e1).colwise() + params.b2);
    Eigen::MatrixXd x3 = assemble_trunk_input(topo, e2, in.extras);
    Eigen::MatrixXd h3 = relu((params.w3 * x3).colwise() + params.b3);

    Eigen::MatrixXd z = sigmoid((params.gz_w * h3 + params.gz_u * h).colwise() +
                                params.gz_b);
    Eigen::MatrixXd r = sigmoid((params.gr_w * h3 + params.gr_u * h).colwise() +
                                params.gr_b);
    Eigen::MatrixXd c =
        ((params.gc_w * h3 + params.gc_u * (r.array() * h.array()).matrix())
             .colwise() +
         params.gc_b)
            .array()
            .tanh()
            .matrix();
    Eigen::MatrixXd h_new =
        ((1.0 - z.array()) * h.array() + z.array() * c.array()).matrix();

    for (int b = 0; b < Topology::kBranches; ++b)
      res.q[t][b] = (params.head_w[b] * h_new).colwise() + params.head_b[b];

    if (want_trace) {
      StepTrace& tr = res.trace[t];
      tr.e1 = std::move(e1);
      tr.e2 = std::move(e2);
      tr.x3 = std::move(x3);
      tr.h3 = std::move(h3);
      tr.gate_z = std::move(z);
      tr.gate_r = std::move(r);
      tr.cand = std::move(c);
      tr.h_new = h_new;
    }
    h = std::move(h_new);
  }
  res.hidden_final = std::move(h);
  return res;
}

BranchOutput forward_step(const NetworkParams& params, const StepInput& step,
                          Eigen::MatrixXd& hidden) {
  auto res = forward_sequence(params, {step}, hidden, false);
  hidden = std::move(res.hidden_final);
  return res.q[0];
}

NetworkParams backward_sequence(const NetworkParams& params,
                                const std::vector<StepInput>& steps,
                                const Eigen::MatrixXd& hidden0,
                                const ForwardResult& fwd,
                                const std::vector<BranchOutput>& dq) {
  const Topology& topo = params.topo;
  if (fwd.trace.size() != steps.size() || dq.size() != steps.size())
    throw std::invalid_argument("backward needs a traced forward of the same length");

  NetworkParams g = zeros_like(params);
  const Eigen::Index cols = steps.empty() ? 0 : steps[0].blocks.cols();
  Eigen::MatrixXd dh_carry = Eigen::MatrixXd::Zero(topo.hidden, cols);

  for (int t = static_cast<int>(steps.size()) - 1; t >= 0; --t) {
    const StepTrace& tr = fwd.trace[t];
    const Eigen::MatrixXd& h_prev = t == 0 ? hidden0 : fwd.trace[t - 1].h_new;

    // Heads.
    Eigen::MatrixXd dh = dh_carry;
    for (int b = 0; b < Topology::kBranches; ++b) {
      const Eigen::MatrixXd& dqb = dq[t][b];
      g.head_w[b].noalias() += dqb * tr.h_new.transpose();
      g.head_b[b].noalias() += dqb.rowwise().sum();
      dh.noalias() += params.head_w[b].transpose() * dqb;
    }

    // Recurrent cell.
    const auto& z = tr.gate_z;
    const auto& r = tr.gate_r;
    const auto& c = tr.cand;
    Eigen::MatrixXd dz =
        (dh.array() * (c.array() - h_prev.array())).matrix();
    Eigen::MatrixXd dc = (dh.array() * z.array()).matrix();
    Eigen::MatrixXd dh_prev = (dh.array() * (1.0 - z.array())).matrix();

    Eigen::MatrixXd dc_pre = (dc.array() * (1.0 - c.array().square())).matrix();
    Eigen::MatrixXd rh = (r.array() * h_prev.array()).matrix();
    g.gc_w.noalias() += dc_pre * tr.h3.transpose();
    g.gc_u.noalias() += dc_pre * rh.transpose();
    g.gc_b.noalias() += dc_pre.rowwise().sum();
    Eigen::MatrixXd dh3 = params.gc_w.transpose() * dc_pre;
    Eigen::MatrixXd drh = params.gc_u.transpose() * dc_pre;
    Eigen::MatrixXd dr = (drh.array() * h_prev.array()).matrix();
    dh_prev.noalias() += (drh.array() * r.array()).matrix();

    Eigen::MatrixXd dz_pre =
        (dz.array() * z.array() * (1.0 - z.array())).matrix();
    g.gz_w.noalias() += dz_pre * tr.h3.transpose();
    g.gz_u.noalias() += dz_pre * h_prev.transpose();
    g.gz_b.noalias() += dz_pre.rowwise().sum();
    dh3.noalias() += params.gz_w.transpose() * dz_pre;
    dh_prev.noalias() += params.gz_u.transpose() * dz_pre;

    Eigen::MatrixXd dr_pre =
        (dr.array() * r.array() * (1.0 - r.array())).matrix();
    g.gr_w.noalias() += dr_pre * tr.h3.transpose();
    g.gr_u.noalias() += dr_pre * h_prev.transpose();
    g.gr_b.noalias() += dr_pre.rowwise().sum();
    dh3.noalias() += params.gr_w.transpose() * dr_pre;
    dh_prev.noalias() += params.gr_u.transpose() * dr_pre;

    // Trunk.
    Eigen::MatrixXd dh3_pre =
        (dh3.array() * (tr.h3.array() > 0.0).cast<double>()).matrix();
    g.w3.noalias() += dh3_pre * tr.x3.transpose();
    g.b3.noalias() += dh3_pre.rowwise().sum();
    Eigen::MatrixXd dx3 = params.w3.transpose() * dh3_pre;

    // Encoders (extras are inputs; their slice of dx3 is dropped).
    Eigen::MatrixXd de2 = scatter_trunk_gradient(topo, dx3);
    Eigen::MatrixXd de2_pre =
        (de2.array() * (tr.e2.array() > 0.0).cast<double>()).matrix();
    g.w2.noalias() += de2_pre * tr.e1.transpose();
    g.b2.noalias() += de2_pre.rowwise().sum();
    Eigen::MatrixXd de1 = params.w2.transpose() * de2_pre;
    Eigen::MatrixXd de1_pre =
        (de1.array() * (tr.e1.array() > 0.0).cast<double>()).matrix();
    g.w1.noalias() += de1_pre * steps[t].blocks.transpose();
    g.b1.noalias() += de1_pre.rowwise().sum();

    dh_carry = std::move(dh_prev);
  }
  return g;
}

double global_norm(const NetworkParams& grads) {
  double sq = 0.0;
  for (const auto& view : tensor_views(grads)) sq += view.squaredNorm();
  return std::sqrt(sq);
}

void scale_params(NetworkParams& p, double factor) {
  for (auto view : tensor_views(p)) view *= factor;
}

AdamState make_adam_state(const NetworkParams& params) {
  AdamState s;
  for (const auto& view : tensor_views(params)) {
    s.m.push_back(Eigen::VectorXd::Zero(view.size()));
    s.v.push_back(Eigen::VectorXd::Zero(view.size()));
  }
  return s;
}

void adam_step(NetworkParams& params, const NetworkParams& grads,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  auto pv = tensor_views(params);
  auto gv = tensor_views(grads);
  if (pv.size() != gv.size() || pv.size() != state.m.size())
    throw std::invalid_argument("optimizer state mismatches parameters");

  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < pv.size(); ++k) {
    if (pv[k].size() != gv[k].size())
      throw std::invalid_argument("gradient shape mismatches parameters");
    auto& m = state.m[k];
    auto& v = state.v[k];
    m = beta1 * m + (1.0 - beta1) * gv[k];
    v = (beta2 * v.array() + (1.0 - beta2) * gv[k].array().square()).matrix();
    pv[k].array() -=
        lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + eps);
  }
}

}  // namespace camcover::net
