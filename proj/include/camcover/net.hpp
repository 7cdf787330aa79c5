#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace camcover::net {

// Shared Q-network shape. Every agent's observation block runs through the
// same two-layer encoder; the queried agent's feature is joined with its
// identity/last-action extras and all other agents' features, then a trunk
// layer feeds a gated recurrent cell and three 3-way Q-value heads
// (translation, rotation, zoom).
struct Topology {
  int n_agents = 0;
  int obs_dim = 0;    // encoder input per agent block
  int extra_dim = 0;  // identity one-hot + previous action
  int enc1 = 64;
  int enc2 = 64;
  int trunk = 128;
  int hidden = 128;

  static constexpr int kBranches = 3;
  static constexpr int kActionsPerBranch = 3;

  int concat_dim() const { return n_agents * enc2 + extra_dim; }
  bool operator==(const Topology&) const = default;
  std::string describe() const;
  void validate() const;
};

struct NetworkParams {
  Topology topo;

  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  // Gated recurrent cell: update z, reset r, candidate c.
  Eigen::MatrixXd gz_w, gz_u, gr_w, gr_u, gc_w, gc_u;
  Eigen::VectorXd gz_b, gr_b, gc_b;

  std::array<Eigen::MatrixXd, Topology::kBranches> head_w;
  std::array<Eigen::VectorXd, Topology::kBranches> head_b;
};

// Fan-in scaled uniform weights, zero biases; deterministic in the seed.
NetworkParams init_params(const Topology& topo, std::uint64_t seed);

NetworkParams zeros_like(const NetworkParams& params);

// All tensors in fixed serialization order, flattened.
std::vector<Eigen::Map<Eigen::VectorXd>> tensor_views(NetworkParams& p);
std::vector<Eigen::Map<const Eigen::VectorXd>> tensor_views(
    const NetworkParams& p);
std::int64_t parameter_count(const NetworkParams& p);

// One time step of input for C parallel streams. For training, a stream is
// one (episode, queried agent) pair; for rollout, one queried agent.
//   blocks: obs_dim x (B * n_agents), column b*n + a holds agent a's block.
//   extras: extra_dim x (B * n_agents), column b*n + q holds the extras of
//           the stream that queries agent q.
struct StepInput {
  Eigen::MatrixXd blocks;
  Eigen::MatrixXd extras;
};

using BranchOutput = std::array<Eigen::MatrixXd, Topology::kBranches>;

struct StepTrace {
  Eigen::MatrixXd e1, e2, x3, h3;
  Eigen::MatrixXd gate_z, gate_r, cand;
  Eigen::MatrixXd h_new;
};

struct ForwardResult {
  std::vector<BranchOutput> q;  // per step: kBranches matrices, 3 x cols
  Eigen::MatrixXd hidden_final;
  std::vector<StepTrace> trace;  // empty unless requested
};

ForwardResult forward_sequence(const NetworkParams& params,
                               const std::vector<StepInput>& steps,
                               const Eigen::MatrixXd& hidden0,
                               bool want_trace);

// Single rollout step for all agents of one world; `hidden` (hidden x n)
// is advanced in place.
BranchOutput forward_step(const NetworkParams& params, const StepInput& step,
                          Eigen::MatrixXd& hidden);

// Exact gradients of a scalar loss with upstream derivative dq on each
// Q output, back through the whole unrolled sequence.
NetworkParams backward_sequence(const NetworkParams& params,
                                const std::vector<StepInput>& steps,
                                const Eigen::MatrixXd& hidden0,
                                const ForwardResult& fwd,
                                const std::vector<BranchOutput>& dq);

double global_norm(const NetworkParams& grads);
void scale_params(NetworkParams& p, double factor);

struct AdamState {
  std::vector<Eigen::VectorXd> m, v;
  std::uint64_t t = 0;
};

AdamState make_adam_state(const NetworkParams& params);

void adam_step(NetworkParams& params, const NetworkParams& grads,
               AdamState& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8);

// Finite-difference verification of backward_sequence on a random small
// network. Returns the worst relative error over all parameters.
struct GradCheckReport {
  double max_rel_error = 0.0;
  int trials = 0;
  std::int64_t skipped = 0;  // probe points straddling a rectifier kink
  bool pass = false;
};

GradCheckReport gradient_check(std::uint64_t seed, int trials,
                               double tolerance = 1e-4,
                               bool inject_fault = false);

}  // namespace camcover::net
