#pragma once

#include <string>
#include <variant>
#include <vector>

#include "bikesim/environment.hpp"

namespace bikesim {

// Lean and preview feedback on the environment state:
//   delta_set = k_phi phi + k_phi_dot phi_dot + sum_k k_t[k] t_Pk
// saturated at the steering limit. Roll positive to the right needs a
// negative k_phi to steer into the fall.
struct BaselineGains {
    double k_phi = 0.0;
    double k_phi_dot = 0.0;
    std::vector<double> k_t = std::vector<double>(5, 0.0);
};

enum class Activation { Tanh, Relu, Linear };

struct DenseLayer {
    int rows = 0;               // outputs
    int cols = 0;               // inputs
    std::vector<double> weights; // row-major rows x cols
    std::vector<double> bias;
    Activation activation = Activation::Linear;
};

// Feed-forward network; the single output is squashed to
// delta_limit * tanh(y).
struct NetworkWeights {
    std::string settings; // name the network was trained with, may be empty
    int input_size = 0;
    double delta_limit = 1.2217304763960306;
    std::vector<DenseLayer> layers;

    void validate() const;
    double forward(const std::vector<double>& x) const;
};

class Policy {
public:
    explicit Policy(BaselineGains g) : impl_(std::move(g)) {}
    explicit Policy(NetworkWeights w);

    double act(const std::vector<double>& state, const EnvSettings& s) const;
    bool is_network() const { return std::holds_alternative<NetworkWeights>(impl_); }
    const BaselineGains* baseline() const { return std::get_if<BaselineGains>(&impl_); }
    const NetworkWeights* network() const { return std::get_if<NetworkWeights>(&impl_); }

private:
    std::variant<BaselineGains, NetworkWeights> impl_;
};

double baseline_policy(const std::vector<double>& state, const BaselineGains& g,
                       const EnvSettings& s);

std::string activation_name(Activation a);
Activation parse_activation(const std::string& name);

std::string weights_to_json(const NetworkWeights& w);
NetworkWeights weights_from_json(const std::string& text);
NetworkWeights load_weights(const std::string& file);

std::string gains_to_json(const BaselineGains& g);
BaselineGains gains_from_json(const std::string& text);
BaselineGains load_gains(const std::string& file);

// Loads either format, telling them apart by content.
Policy load_policy(const std::string& file);

} // namespace bikesim
