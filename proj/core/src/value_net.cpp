#include "cbfrl/value_net.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace cbfrl {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

Eigen::MatrixXd row_from_state(const ValueNet& net, const StateVec& x) {
    if (static_cast<int>(x.size()) != net.input_dim()) {
        throw std::invalid_argument("forward: state dimension does not match network input");
    }
    Eigen::MatrixXd row(1, net.input_dim());
    for (int i = 0; i < net.input_dim(); ++i) row(0, i) = x[i];
    return row;
}

} // namespace

ValueNet make_value_net(const std::vector<int>& layer_sizes, Head head, double gamma,
                        RngStream& rng) {
    if (layer_sizes.size() < 2) {
        throw std::invalid_argument("make_value_net: need at least input and output sizes");
    }
    for (int n : layer_sizes) {
        if (n <= 0) throw std::invalid_argument("make_value_net: layer sizes must be positive");
    }
    if (gamma < 0.0 || gamma >= 1.0) {
        throw std::invalid_argument("make_value_net: gamma must be in [0, 1)");
    }

    ValueNet net;
    net.layer_sizes = layer_sizes;
    net.head = head;
    net.gamma = gamma;
    for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        const int fan_in = layer_sizes[l];
        const int fan_out = layer_sizes[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r) {
            for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
        }
        Eigen::VectorXd b(fan_out);
        for (int r = 0; r < fan_out; ++r) b(r) = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

ForwardTrace forward_batch(const ValueNet& net, const Eigen::MatrixXd& states) {
    if (states.cols() != net.input_dim()) {
        throw std::invalid_argument("forward_batch: state dimension does not match network input");
    }
    ForwardTrace trace;
    trace.input = states;

    const int layers = net.layer_count();
    Eigen::MatrixXd a = states;
    for (int l = 0; l < layers - 1; ++l) {
        Eigen::MatrixXd z = a * net.weights[l].transpose();
        z.rowwise() += net.biases[l].transpose();
        a = z.array().tanh().matrix();
        trace.activations.push_back(a);
    }
    trace.raw_logits = a * net.weights[layers - 1].transpose();
    trace.raw_logits.rowwise() += net.biases[layers - 1].transpose();

    if (net.head == Head::kBounded) {
        trace.logits = trace.raw_logits.array().min(kLogitClamp).max(-kLogitClamp).matrix();
        trace.q = sigmoid(trace.logits) / (1.0 - net.gamma);
    } else {
        trace.logits = trace.raw_logits;
        trace.q = trace.raw_logits;
    }
    return trace;
}

std::vector<ActionValue> forward(const ValueNet& net, const StateVec& x) {
    const ForwardTrace trace = forward_batch(net, row_from_state(net, x));
    std::vector<ActionValue> out(net.action_count());
    for (int a = 0; a < net.action_count(); ++a) {
        out[a] = ActionValue{trace.q(0, a), trace.logits(0, a)};
    }
    return out;
}

double value_of(const ValueNet& net, const StateVec& x) {
    const auto qs = forward(net, x);
    double best = qs[0].q;
    for (const auto& av : qs) best = std::max(best, av.q);
    return best;
}

ActionId greedy_action(const ValueNet& net, const StateVec& x) {
    const auto qs = forward(net, x);
    ActionId best = 0;
    for (int a = 1; a < static_cast<int>(qs.size()); ++a) {
        if (qs[a].q > qs[best].q) best = a;
    }
    return best;
}

double max_logit(const ValueNet& net, const StateVec& x) {
    const auto qs = forward(net, x);
    double best = qs[0].logit;
    for (const auto& av : qs) best = std::max(best, av.logit);
    return best;
}

void GradientBuffer::add_scaled(const GradientBuffer& other, double scale) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        weights[l] += scale * other.weights[l];
        biases[l] += scale * other.biases[l];
    }
}

bool GradientBuffer::finite() const {
    for (const auto& w : weights) {
        if (!w.allFinite()) return false;
    }
    for (const auto& b : biases) {
        if (!b.allFinite()) return false;
    }
    return true;
}

GradientBuffer zero_gradients(const ValueNet& net) {
    GradientBuffer g;
    for (int l = 0; l < net.layer_count(); ++l) {
        g.weights.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        g.biases.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    return g;
}

GradientBuffer backward_batch(const ValueNet& net, const ForwardTrace& trace,
                              const Eigen::MatrixXd& upstream_q) {
    if (upstream_q.rows() != trace.q.rows() || upstream_q.cols() != trace.q.cols()) {
        throw std::invalid_argument("backward_batch: upstream gradient shape mismatch");
    }
    const int layers = net.layer_count();
    GradientBuffer grads = zero_gradients(net);

    Eigen::MatrixXd dz;
    if (net.head == Head::kBounded) {
        // dq/dz = sigma'(z) / (1-gamma), zero where the clamp saturated.
        const Eigen::ArrayXXd sig = sigmoid(trace.logits).array();
        const Eigen::ArrayXXd pass =
            (trace.raw_logits.array().abs() <= kLogitClamp).cast<double>();
        dz = (upstream_q.array() * sig * (1.0 - sig) * pass / (1.0 - net.gamma)).matrix();
    } else {
        dz = upstream_q;
    }

    for (int l = layers - 1; l >= 0; --l) {
        const Eigen::MatrixXd& below =
            (l == 0) ? trace.input : trace.activations[static_cast<std::size_t>(l) - 1];
        grads.weights[l] = dz.transpose() * below;
        grads.biases[l] = dz.colwise().sum().transpose();
        if (l > 0) {
            const Eigen::MatrixXd da = dz * net.weights[l];
            const Eigen::ArrayXXd act = trace.activations[static_cast<std::size_t>(l) - 1].array();
            dz = (da.array() * (1.0 - act.square())).matrix();
        }
    }
    return grads;
}

GradientBuffer backward(const ValueNet& net, const StateVec& x,
                        const std::vector<double>& upstream_q) {
    if (static_cast<int>(upstream_q.size()) != net.action_count()) {
        throw std::invalid_argument("backward: upstream gradient must have one entry per action");
    }
    const ForwardTrace trace = forward_batch(net, row_from_state(net, x));
    Eigen::MatrixXd up(1, net.action_count());
    for (int a = 0; a < net.action_count(); ++a) up(0, a) = upstream_q[a];
    return backward_batch(net, trace, up);
}

AdamState make_adam_state(const ValueNet& net) {
    AdamState st;
    for (int l = 0; l < net.layer_count(); ++l) {
        st.m_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        st.v_w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
        st.m_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
        st.v_b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
    }
    return st;
}

void adam_step(ValueNet& net, AdamState& state, const GradientBuffer& grads, double lr,
               double beta1, double beta2, double eps) {
    if (!grads.finite()) throw std::runtime_error("adam_step: non-finite gradient");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

    for (int l = 0; l < net.layer_count(); ++l) {
        state.m_w[l] = beta1 * state.m_w[l] + (1.0 - beta1) * grads.weights[l];
        state.v_w[l] =
            (beta2 * state.v_w[l].array() + (1.0 - beta2) * grads.weights[l].array().square())
                .matrix();
        net.weights[l].array() -=
            lr * (state.m_w[l].array() / bc1) / ((state.v_w[l].array() / bc2).sqrt() + eps);

        state.m_b[l] = beta1 * state.m_b[l] + (1.0 - beta1) * grads.biases[l];
        state.v_b[l] =
            (beta2 * state.v_b[l].array() + (1.0 - beta2) * grads.biases[l].array().square())
                .matrix();
        net.biases[l].array() -=
            lr * (state.m_b[l].array() / bc1) / ((state.v_b[l].array() / bc2).sqrt() + eps);
    }
}

void save_checkpoint(std::ostream& out, const ValueNet& net, const std::string& arch) {
    out << "arch=" << arch << '\n';
    out << "head=" << (net.head == Head::kBounded ? "bounded" : "unbounded") << '\n';
    out << std::setprecision(17);
    out << "gamma=" << net.gamma << '\n';
    out << "layers=";
    for (std::size_t i = 0; i < net.layer_sizes.size(); ++i) {
        if (i) out << ',';
        out << net.layer_sizes[i];
    }
    out << '\n';
    for (int l = 0; l < net.layer_count(); ++l) {
        for (int r = 0; r < net.weights[l].rows(); ++r) {
            for (int c = 0; c < net.weights[l].cols(); ++c) {
                if (r || c) out << ' ';
                out << net.weights[l](r, c);
            }
        }
        out << '\n';
        for (int r = 0; r < net.biases[l].size(); ++r) {
            if (r) out << ' ';
            out << net.biases[l](r);
        }
        out << '\n';
    }
}

void save_checkpoint_file(const std::string& path, const ValueNet& net, const std::string& arch) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_checkpoint_file: cannot open " + path);
    save_checkpoint(out, net, arch);
    if (!out) throw std::runtime_error("save_checkpoint_file: write failed for " + path);
}

namespace {

std::string expect_header(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(key, 0) != 0) {
        throw std::runtime_error("load_checkpoint: missing header '" + key + "'");
    }
    return line.substr(key.size());
}

} // namespace

Checkpoint load_checkpoint(std::istream& in) {
    Checkpoint ckpt;
    ckpt.arch = expect_header(in, "arch=");
    const std::string head = expect_header(in, "head=");
    if (head == "bounded") {
        ckpt.net.head = Head::kBounded;
    } else if (head == "unbounded") {
        ckpt.net.head = Head::kUnbounded;
    } else {
        throw std::runtime_error("load_checkpoint: unknown head '" + head + "'");
    }
    ckpt.net.gamma = std::stod(expect_header(in, "gamma="));

    std::istringstream sizes(expect_header(in, "layers="));
    std::string token;
    while (std::getline(sizes, token, ',')) ckpt.net.layer_sizes.push_back(std::stoi(token));
    if (ckpt.net.layer_sizes.size() < 2) {
        throw std::runtime_error("load_checkpoint: layers header needs at least two sizes");
    }

    for (std::size_t l = 0; l + 1 < ckpt.net.layer_sizes.size(); ++l) {
        const int rows = ckpt.net.layer_sizes[l + 1];
        const int cols = ckpt.net.layer_sizes[l];
        Eigen::MatrixXd w(rows, cols);
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                if (!(in >> w(r, c))) throw std::runtime_error("load_checkpoint: truncated weights");
            }
        }
        Eigen::VectorXd b(rows);
        for (int r = 0; r < rows; ++r) {
            if (!(in >> b(r))) throw std::runtime_error("load_checkpoint: truncated biases");
        }
        ckpt.net.weights.push_back(std::move(w));
        ckpt.net.biases.push_back(std::move(b));
    }
    return ckpt;
}

Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_checkpoint_file: cannot open " + path);
    return load_checkpoint(in);
}

} // namespace cbfrl
