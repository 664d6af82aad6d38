#include "bikesim/params.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/LU>

#include "bikesim/errors.hpp"

namespace bikesim {

BicycleParams BicycleParams::benchmark()
{
    BicycleParams p;
    p.rR = 0.3;
    p.rF = 0.35;
    p.lambda = std::numbers::pi / 10.0;
    p.alpha = p.lambda;
    p.trail_c = 0.08;
    p.wheelbase = 1.02;
    p.gravity_g = 9.81;

    const double sl = std::sin(p.lambda);
    const double cl = std::cos(p.lambda);
    p.d1 = cl * (p.trail_c + p.wheelbase - p.rR * std::tan(p.lambda));
    p.d3 = -cl * (p.trail_c - p.rF * std::tan(p.lambda));
    p.d2 = (p.rR + p.d1 * sl - p.rF + p.d3 * sl) / cl;

    p.com_B = {0.3, 0.9};
    p.com_H = {0.9, 0.7};

    auto& l = p.lateral;
    l.M << 80.81722, 2.31941332208709,
           2.31941332208709, 0.29784188199686;
    l.C1 << 0.0, 33.86641391492494,
            -0.85035641456978, 1.68540397397560;
    l.K0 << -80.95, -2.59951685249872,
            -2.59951685249872, -0.80329488458618;
    l.K2 << 0.0, 76.59734589573222,
            0.0, 2.65431523794604;
    return p;
}

void BicycleParams::validate() const
{
    auto require = [](bool ok, const char* what) {
        if (!ok) {
            throw ConfigError(std::string("invalid bicycle parameters: ") + what);
        }
    };
    require(rR > 0.0, "rR must be > 0");
    require(rF > 0.0, "rF must be > 0");
    require(d1 > 0.0, "d1 must be > 0");
    require(wheelbase > 0.0, "wheelbase must be > 0");
    require(gravity_g >= 0.0, "gravity_g must be >= 0");
    require(std::abs(lambda) < std::numbers::pi / 2.0, "|lambda| must be < pi/2");
    require((lateral.M - lateral.M.transpose()).norm() < 1e-9, "lateral.M must be symmetric");
    const Eigen::Matrix2d& m = lateral.M;
    require(m(0, 0) > 0.0 && m.determinant() > 0.0, "lateral.M must be positive definite");
}

namespace {

struct Field {
    const char* key;
    int count; // 1 scalar, 2 vector, 4 matrix
};

const std::vector<Field>& fields()
{
    static const std::vector<Field> f = {
        {"rR", 1}, {"rF", 1}, {"lambda", 1}, {"alpha", 1}, {"d1", 1}, {"d2", 1},
        {"d3", 1}, {"trail_c", 1}, {"wheelbase", 1}, {"gravity_g", 1},
        {"com_B", 2}, {"com_H", 2},
        {"lateral.M", 4}, {"lateral.C1", 4}, {"lateral.K0", 4}, {"lateral.K2", 4},
    };
    return f;
}

double* scalar_slot(BicycleParams& p, const std::string& key)
{
    if (key == "rR") return &p.rR;
    if (key == "rF") return &p.rF;
    if (key == "lambda") return &p.lambda;
    if (key == "alpha") return &p.alpha;
    if (key == "d1") return &p.d1;
    if (key == "d2") return &p.d2;
    if (key == "d3") return &p.d3;
    if (key == "trail_c") return &p.trail_c;
    if (key == "wheelbase") return &p.wheelbase;
    if (key == "gravity_g") return &p.gravity_g;
    if (key == "com_B") return p.com_B.data();
    if (key == "com_H") return p.com_H.data();
    return nullptr;
}

Eigen::Matrix2d* matrix_slot(BicycleParams& p, const std::string& key)
{
    if (key == "lateral.M") return &p.lateral.M;
    if (key == "lateral.C1") return &p.lateral.C1;
    if (key == "lateral.K0") return &p.lateral.K0;
    if (key == "lateral.K2") return &p.lateral.K2;
    return nullptr;
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

BicycleParams parse_params(std::string_view text)
{
    std::map<std::string, std::vector<double>> values;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("params line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        std::istringstream vs(line.substr(eq + 1));
        std::vector<double> nums;
        std::string tok;
        while (vs >> tok) {
            try {
                std::size_t used = 0;
                nums.push_back(std::stod(tok, &used));
                if (used != tok.size()) {
                    throw std::invalid_argument(tok);
                }
            } catch (const std::exception&) {
                throw ConfigError("params line " + std::to_string(lineno) + ": bad number '" + tok + "'");
            }
        }
        if (values.count(key) != 0) {
            throw ConfigError("params: duplicate key '" + key + "'");
        }
        values[key] = std::move(nums);
    }

    BicycleParams p;
    for (const auto& f : fields()) {
        auto it = values.find(f.key);
        if (it == values.end()) {
            throw ConfigError(std::string("params: missing field '") + f.key + "'");
        }
        if (static_cast<int>(it->second.size()) != f.count) {
            throw ConfigError(std::string("params: field '") + f.key + "' expects " +
                              std::to_string(f.count) + " value(s)");
        }
        if (f.count == 4) {
            auto* m = matrix_slot(p, f.key);
            const auto& v = it->second;
            *m << v[0], v[1], v[2], v[3];
        } else {
            double* s = scalar_slot(p, f.key);
            for (int i = 0; i < f.count; ++i) {
                s[i] = it->second[i];
            }
        }
        values.erase(it);
    }
    if (!values.empty()) {
        throw ConfigError("params: unknown field '" + values.begin()->first + "'");
    }
    p.validate();
    return p;
}

BicycleParams load_params(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open params file: " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_params(ss.str());
}

std::string format_params(const BicycleParams& p)
{
    std::ostringstream out;
    out << std::setprecision(17);
    BicycleParams copy = p;
    for (const auto& f : fields()) {
        out << f.key << " =";
        if (f.count == 4) {
            const auto& m = *matrix_slot(copy, f.key);
            out << ' ' << m(0, 0) << ' ' << m(0, 1) << ' ' << m(1, 0) << ' ' << m(1, 1);
        } else {
            const double* s = scalar_slot(copy, f.key);
            for (int i = 0; i < f.count; ++i) {
                out << ' ' << s[i];
            }
        }
        out << '\n';
    }
    return out.str();
}

} // namespace bikesim
