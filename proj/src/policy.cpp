#include "bikesim/policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bikesim/errors.hpp"

namespace bikesim {

using json = nlohmann::json;

namespace {

std::string read_file(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse(const std::string& text)
{
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

std::string activation_name(Activation a)
{
    switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Linear: return "linear";
    }
    return "linear";
}

Activation parse_activation(const std::string& name)
{
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "linear") return Activation::Linear;
    throw ConfigError("unknown activation '" + name + "'");
}

void NetworkWeights::validate() const
{
    if (layers.empty()) throw ConfigError("network has no layers");
    int width = input_size;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        const std::string at = "layer " + std::to_string(i) + ": ";
        if (l.cols != width) throw ConfigError(at + "cols does not match previous width");
        if (l.rows < 1) throw ConfigError(at + "rows must be >= 1");
        if (l.weights.size() != static_cast<std::size_t>(l.rows) * l.cols) {
            throw ConfigError(at + "weights size != rows * cols");
        }
        if (l.bias.size() != static_cast<std::size_t>(l.rows)) {
            throw ConfigError(at + "bias size != rows");
        }
        width = l.rows;
    }
    if (width != 1) throw ConfigError("network output width must be 1");
    if (!(delta_limit > 0.0)) throw ConfigError("delta_limit must be > 0");
}

double NetworkWeights::forward(const std::vector<double>& x) const
{
    if (static_cast<int>(x.size()) != input_size) {
        throw InvalidInput("network input has " + std::to_string(x.size()) + " entries, expected " +
                           std::to_string(input_size));
    }
    std::vector<double> a = x;
    std::vector<double> b;
    for (const auto& l : layers) {
        b.assign(static_cast<std::size_t>(l.rows), 0.0);
        for (int r = 0; r < l.rows; ++r) {
            double acc = l.bias[r];
            const double* w = &l.weights[static_cast<std::size_t>(r) * l.cols];
            for (int c = 0; c < l.cols; ++c) acc += w[c] * a[c];
            switch (l.activation) {
            case Activation::Tanh: acc = std::tanh(acc); break;
            case Activation::Relu: acc = std::max(acc, 0.0); break;
            case Activation::Linear: break;
            }
            b[r] = acc;
        }
        a.swap(b);
    }
    return delta_limit * std::tanh(a[0]);
}

Policy::Policy(NetworkWeights w) : impl_(std::move(w))
{
    std::get<NetworkWeights>(impl_).validate();
}

double baseline_policy(const std::vector<double>& state, const BaselineGains& g,
                       const EnvSettings& s)
{
    if (static_cast<int>(state.size()) != s.state_size()) {
        throw InvalidInput("baseline: state size mismatch");
    }
    const std::size_t base = s.state_form == StateForm::Q ? 0 : 1;
    const double phi = state[3 + base];
    const double phi_dot = state[7 + base];
    const std::size_t tp = s.state_form == StateForm::Q ? 10 : 11;
    double d = g.k_phi * phi + g.k_phi_dot * phi_dot;
    const std::size_t n = std::min(g.k_t.size(), state.size() - tp);
    for (std::size_t k = 0; k < n; ++k) d += g.k_t[k] * state[tp + k];
    return std::clamp(d, -s.delta_limit, s.delta_limit);
}

double Policy::act(const std::vector<double>& state, const EnvSettings& s) const
{
    if (const auto* g = std::get_if<BaselineGains>(&impl_)) {
        return baseline_policy(state, *g, s);
    }
    return std::get<NetworkWeights>(impl_).forward(state);
}

std::string weights_to_json(const NetworkWeights& w)
{
    json j;
    j["format"] = "bikesim-policy";
    j["version"] = 1;
    j["settings"] = w.settings;
    j["input_size"] = w.input_size;
    j["delta_limit"] = w.delta_limit;
    j["layers"] = json::array();
    for (const auto& l : w.layers) {
        j["layers"].push_back({{"rows", l.rows},
                               {"cols", l.cols},
                               {"activation", activation_name(l.activation)},
                               {"weights", l.weights},
                               {"bias", l.bias}});
    }
    return j.dump(1);
}

NetworkWeights weights_from_json(const std::string& text)
{
    const json j = parse(text);
    try {
        if (j.at("format").get<std::string>() != "bikesim-policy") {
            throw ConfigError("not a bikesim-policy file");
        }
        if (j.at("version").get<int>() != 1) throw ConfigError("unsupported weights version");
        NetworkWeights w;
        w.settings = j.value("settings", std::string());
        w.input_size = j.at("input_size").get<int>();
        w.delta_limit = j.value("delta_limit", w.delta_limit);
        for (const auto& jl : j.at("layers")) {
            DenseLayer l;
            l.rows = jl.at("rows").get<int>();
            l.cols = jl.at("cols").get<int>();
            l.activation = parse_activation(jl.at("activation").get<std::string>());
            l.weights = jl.at("weights").get<std::vector<double>>();
            l.bias = jl.at("bias").get<std::vector<double>>();
            w.layers.push_back(std::move(l));
        }
        w.validate();
        return w;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("weights file: ") + e.what());
    }
}

NetworkWeights load_weights(const std::string& file)
{
    return weights_from_json(read_file(file));
}

std::string gains_to_json(const BaselineGains& g)
{
    json j;
    j["format"] = "bikesim-baseline";
    j["k_phi"] = g.k_phi;
    j["k_phi_dot"] = g.k_phi_dot;
    j["k_t"] = g.k_t;
    return j.dump(1);
}

BaselineGains gains_from_json(const std::string& text)
{
    const json j = parse(text);
    try {
        if (j.at("format").get<std::string>() != "bikesim-baseline") {
            throw ConfigError("not a bikesim-baseline file");
        }
        BaselineGains g;
        g.k_phi = j.at("k_phi").get<double>();
        g.k_phi_dot = j.at("k_phi_dot").get<double>();
        g.k_t = j.at("k_t").get<std::vector<double>>();
        return g;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("gains file: ") + e.what());
    }
}

BaselineGains load_gains(const std::string& file)
{
    return gains_from_json(read_file(file));
}

Policy load_policy(const std::string& file)
{
    const std::string text = read_file(file);
    const json j = parse(text);
    const std::string fmt = j.value("format", std::string());
    if (fmt == "bikesim-policy") return Policy(weights_from_json(text));
    if (fmt == "bikesim-baseline") return Policy(gains_from_json(text));
    throw ConfigError(file + ": unknown policy format '" + fmt + "'");
}

} // namespace bikesim
