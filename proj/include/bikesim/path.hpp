#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bikesim/rng.hpp"

namespace bikesim {

enum class ElementType { Line, Arc, Poly5 };

struct PathElement {
    ElementType type = ElementType::Line;
    double L = 0.0;      // line length
    double Phi = 0.0;    // arc angle
    double R = 0.0;      // arc radius
    double LP = 0.0;     // quintic chordwise length
    double WP = 0.0;     // quintic lateral width
    int sign = 1;        // +1 turns / transfers to the left

    static PathElement line(double L);
    static PathElement arc(double Phi, double R, int sign);
    static PathElement poly5(double LP, double WP, int sign);

    void validate() const;
};

struct Pose2 {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;
};

class Path {
public:
    Path() = default;
    Path(const Pose2& start, std::vector<PathElement> elements);

    double length() const { return total_; }
    const Pose2& start() const { return start_; }
    const std::vector<PathElement>& elements() const { return elements_; }
    // Arc length at the beginning of each element, plus the total at the end.
    const std::vector<double>& breaks() const { return breaks_; }

    // End point coincides with the start (1e-6 m, 1e-9 rad tangent).
    bool closed() const { return closed_; }

    // For closed paths s is taken modulo the length; otherwise OutOfRange is
    // thrown outside [0, length].
    Eigen::Vector2d point_at(double s) const;
    double tangent_at(double s) const;
    double curvature_at(double s) const;

    Pose2 end_pose() const;

private:
    struct Segment {
        Pose2 start;
        double length = 0.0;
        // quintic arc-length table at uniform chord panels
        std::vector<double> chord_s;
    };

    double normalize(double s, std::size_t& index, double& local) const;
    static double poly5_arclength(const PathElement& e, const std::vector<double>& table, double x);
    static double poly5_chord(const PathElement& e, const std::vector<double>& table, double s);

    Pose2 start_;
    std::vector<PathElement> elements_;
    std::vector<Segment> segments_;
    std::vector<double> breaks_;
    double total_ = 0.0;
    bool closed_ = false;
};

struct PathCursor {
    double s_last = 0.0;
    double window = 5.0;
};

struct NearestPoint {
    double s_star = 0.0;
    double t0 = 0.0;
    int side = 1;
    Eigen::Vector2d point = Eigen::Vector2d::Zero();
};

// Minimises the distance over [s_last, s_last + window] and advances the
// cursor. For closed paths the search wraps and s_star keeps growing past the
// length. Throws EndOfPath when an open path's end lies inside the window and
// is the minimiser, i.e. the point has moved past the end.
NearestPoint nearest_on_path(const Path& path, PathCursor& cursor, const Eigen::Vector2d& point);

// Lateral offsets (yaw-aligned ground frame) of the path points at s_star,
// s_star + ds, ..., s_star + n_prev * ds, measured from P.
std::vector<double> preview_vector(const Path& path, double s_star, const Eigen::Vector2d& P,
                                   double Psi, double ds, int n_prev = 4);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct PathIntervals {
    Interval L{5.0, 15.0};
    Interval Phi{0.7853981633974483, 1.5707963267948966};
    Interval R{8.0, 14.0};
    Interval LP{14.0, 22.0};
    Interval WP{2.0, 8.0};
};

struct ElementMix {
    double arc = 0.4;
    double poly5 = 0.4;
    double line = 0.2;
    double p_left = 0.5; // probability of a left turn / transfer
};

// Start tangent is Psi plus a uniform draw in [-5 deg, 5 deg]. Elements are
// appended until the length reaches min_length.
Path random_path(Rng& rng, const PathIntervals& iv, const Eigen::Vector2d& start, double Psi,
                 double min_length, const ElementMix& mix = {});

// Closed evaluation course on a 5 m grid: full circle, slalom, lane change,
// curves, hard lane change and connecting straights.
Path benchmark_path();

std::string format_path(const Path& path);
Path parse_path(std::string_view text);
Path load_path(const std::string& file);
void save_path(const Path& path, const std::string& file);

} // namespace bikesim
