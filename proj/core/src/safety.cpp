#include "cbfrl/safety.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace cbfrl {

namespace {
constexpr int kRejectionBudget = 1'000'000;

StateVec draw_uniform(const Box& box, RngStream& rng) {
    StateVec x(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i) {
        x[i] = rng.uniform(box.lo[i], box.hi[i]);
    }
    return x;
}
} // namespace

double safety_reward(const StateVec& next_state, const SafetySpec& spec) {
    if (!is_finite(next_state)) {
        throw std::invalid_argument("safety_reward: non-finite state (corrupted rollout)");
    }
    return spec.is_unsafe(next_state) ? 0.0 : 1.0;
}

StateVec sample_state(const SafetySpec& spec, RngStream& rng, SampleMode mode) {
    if (mode == SampleMode::kUniformBox) {
        return draw_uniform(spec.sample_domain, rng);
    }
    for (int i = 0; i < kRejectionBudget; ++i) {
        StateVec x = draw_uniform(spec.sample_domain, rng);
        if (spec.is_unsafe(x)) return x;
    }
    throw std::runtime_error("sample_state: no unsafe draw within " +
                             std::to_string(kRejectionBudget) +
                             " attempts; unsafe set has negligible measure in X'");
}

SafetyEpisode::SafetyEpisode(DynamicsFn dynamics, SafetySpec spec, int step_cap)
    : dynamics_(std::move(dynamics)), spec_(std::move(spec)), step_cap_(step_cap) {
    if (step_cap_ <= 0) throw std::invalid_argument("SafetyEpisode: step_cap must be positive");
}

void SafetyEpisode::reset(const StateVec& start) {
    if (!is_finite(start)) throw std::invalid_argument("SafetyEpisode::reset: non-finite start");
    if (spec_.is_unsafe(start)) {
        throw std::invalid_argument("SafetyEpisode::reset: start state is unsafe");
    }
    state_ = start;
    steps_ = 0;
    finished_ = false;
}

Transition SafetyEpisode::step(ActionId action) {
    if (finished_) throw std::logic_error("SafetyEpisode::step called after episode end");

    Transition t;
    t.state = state_;
    t.action = action;
    t.next_state = dynamics_(state_, action);
    t.reward = safety_reward(t.next_state, spec_);
    ++steps_;

    if (spec_.is_unsafe(t.next_state)) {
        t.terminal = true;
    } else if (steps_ >= step_cap_) {
        t.truncated = true;
    }
    finished_ = t.terminal || t.truncated;
    state_ = t.next_state;
    return t;
}

} // namespace cbfrl
