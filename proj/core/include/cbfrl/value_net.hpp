#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cbfrl/rng.hpp"
#include "cbfrl/types.hpp"

namespace cbfrl {

/// Output head of the Q-network. kBounded squashes each action's raw
/// logit phi through sigma and rescales by 1/(1-gamma), so every Q value
/// stays strictly inside (0, 1/(1-gamma)) and the logit's sign tells on
/// which side of 1/(2(1-gamma)) the value lies.
enum class Head { kUnbounded, kBounded };

/// Feed-forward Q-network: tanh hidden layers, one output per action.
/// Value-like: copy freely; a single instance must not be mutated from
/// two threads.
struct ValueNet {
    std::vector<int> layer_sizes;          // input, hidden..., action count
    std::vector<Eigen::MatrixXd> weights;  // weights[l] is (out x in)
    std::vector<Eigen::VectorXd> biases;
    Head head = Head::kUnbounded;
    double gamma = 0.99;

    int input_dim() const { return layer_sizes.front(); }
    int action_count() const { return layer_sizes.back(); }
    int layer_count() const { return static_cast<int>(weights.size()); }
};

/// Bounded-head logits are clamped here before sigma; far enough out that
/// the h >= 0 decision boundary is never affected.
inline constexpr double kLogitClamp = 30.0;

/// Uniform fan-in init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and
/// biases. layer_sizes needs at least {input, output}.
ValueNet make_value_net(const std::vector<int>& layer_sizes, Head head, double gamma,
                        RngStream& rng);

struct ActionValue {
    double q = 0.0;
    double logit = 0.0;
};

/// Batched forward pass with everything backward() needs retained.
struct ForwardTrace {
    Eigen::MatrixXd input;                      // B x input_dim
    std::vector<Eigen::MatrixXd> activations;   // post-tanh, per hidden layer
    Eigen::MatrixXd raw_logits;                 // pre-clamp output layer
    Eigen::MatrixXd logits;                     // clamped for the bounded head
    Eigen::MatrixXd q;                          // B x actions
};

ForwardTrace forward_batch(const ValueNet& net, const Eigen::MatrixXd& states);

/// Per-action outputs at a single state. Throws on dimension mismatch.
std::vector<ActionValue> forward(const ValueNet& net, const StateVec& x);

/// V(x) = max over actions of Q(x, a).
double value_of(const ValueNet& net, const StateVec& x);

/// Argmax action; ties break toward the lowest index.
ActionId greedy_action(const ValueNet& net, const StateVec& x);

double max_logit(const ValueNet& net, const StateVec& x);

/// Per-action Q values at a state; the abstraction the shield and the
/// Bellman-residual metric run on (a network, a lookup table, ...).
using QFunction = std::function<std::vector<double>(const StateVec&)>;

struct GradientBuffer {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;

    void add_scaled(const GradientBuffer& other, double scale);
    bool finite() const;
};

GradientBuffer zero_gradients(const ValueNet& net);

/// Exact gradients of sum_{b,a} upstream(b,a) * Q_b(a) with respect to all
/// parameters, including the sigma and 1/(1-gamma) head factors.
GradientBuffer backward_batch(const ValueNet& net, const ForwardTrace& trace,
                              const Eigen::MatrixXd& upstream_q);

GradientBuffer backward(const ValueNet& net, const StateVec& x,
                        const std::vector<double>& upstream_q);

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long step = 0;
};

AdamState make_adam_state(const ValueNet& net);

/// Standard Adam update with bias correction. Throws std::runtime_error on
/// a non-finite gradient (training divergence signal).
void adam_step(ValueNet& net, AdamState& state, const GradientBuffer& grads, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Plain-text checkpoint: header lines arch=, head=, gamma=, layers=, then
/// one line per parameter tensor in row-major order. Values are printed
/// with 17 significant digits so a round trip reproduces outputs exactly.
void save_checkpoint(std::ostream& out, const ValueNet& net, const std::string& arch);
void save_checkpoint_file(const std::string& path, const ValueNet& net, const std::string& arch);

struct Checkpoint {
    ValueNet net;
    std::string arch;
};

Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint_file(const std::string& path);

} // namespace cbfrl
