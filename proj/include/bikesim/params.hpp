#pragma once

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace bikesim {

// Linearised roll/steer coefficient blocks acting on (roll, steer), as
// published for the benchmark bicycle (x forward, y right, z down):
//   M q'' + v C1 q' + (g K0 + v^2 K2) q = (T_roll, T_steer)
struct LateralCoefficients {
    Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d C1 = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d K0 = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d K2 = Eigen::Matrix2d::Zero();
};

// Geometry and lateral-dynamics data of a Whipple bicycle. All lengths in m,
// angles in rad. Points given for the reference configuration use x forward
// and z up, measured from the rear contact point.
struct BicycleParams {
    double rR = 0.0;          // rear wheel radius
    double rF = 0.0;          // front wheel radius
    double lambda = 0.0;      // steering axis tilt from vertical
    double alpha = 0.0;       // frame angle (rear hub -> head point direction)
    double d1 = 0.0;          // frame length
    double d2 = 0.0;          // fork length along the steering axis
    double d3 = 0.0;          // fork offset
    double trail_c = 0.0;
    double wheelbase = 0.0;   // nominal, reference configuration
    double gravity_g = 0.0;
    Eigen::Vector2d com_B = Eigen::Vector2d::Zero(); // rear body (x, z)
    Eigen::Vector2d com_H = Eigen::Vector2d::Zero(); // handlebar (x, z)
    LateralCoefficients lateral;

    // Benchmark bicycle with frame direction perpendicular to the steering
    // axis (alpha = lambda); d1..d3 follow from wheelbase, trail and tilt.
    static BicycleParams benchmark();

    // Throws ConfigError when an invariant is violated.
    void validate() const;
};

// Key-value text format, one `key = value` per line, '#' starts a comment.
// Matrices are four numbers in row-major order. Every field is required.
BicycleParams parse_params(std::string_view text);
BicycleParams load_params(const std::string& path);
std::string format_params(const BicycleParams& p);

} // namespace bikesim
