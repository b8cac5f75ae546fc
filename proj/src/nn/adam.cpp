#include "warpconv/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace warpconv::nn {

AdamState make_adam_state(const std::vector<ParameterRef>& params) {
    AdamState s;
    for (const auto& p : params) {
        s.first.emplace_back(p.value.size(), 0.0);
        s.second.emplace_back(p.value.size(), 0.0);
    }
    return s;
}

void adam_step(const AdamConfig& config, AdamState& state, const std::vector<ParameterRef>& params) {
    if (state.first.size() != params.size() || state.second.size() != params.size())
        throw std::invalid_argument("adam_step: state does not match parameter list");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correct1 = 1.0 - std::pow(config.beta1, t);
    const double correct2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto value = params[p].value;
        const auto grad = params[p].grad;
        auto& m = state.first[p];
        auto& v = state.second[p];
        if (m.size() != value.size() || grad.size() != value.size())
            throw std::invalid_argument("adam_step: moment shape mismatch for " + params[p].name);
        for (std::size_t k = 0; k < value.size(); ++k) {
            m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * grad[k];
            v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * grad[k] * grad[k];
            const double m_hat = m[k] / correct1;
            const double v_hat = v[k] / correct2;
            const double delta = config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
            if (delta != 0.0) value[k] -= delta;
        }
    }
}

}  // namespace warpconv::nn
