#include "bikesim/path.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "bikesim/errors.hpp"

namespace bikesim {

using Eigen::Vector2d;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPanels = 32;

// 8-point Gauss-Legendre on [-1, 1]
constexpr std::array<double, 4> kGLx = {0.1834346424956498, 0.5255324099163290,
                                        0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGLw = {0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};

double smooth(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }
double smooth_d(double u) { return 30.0 * u * u * (1.0 - u) * (1.0 - u); }
double smooth_dd(double u) { return 60.0 * u - 180.0 * u * u + 120.0 * u * u * u; }

double poly5_slope(const PathElement& e, double x)
{
    return e.sign * e.WP / e.LP * smooth_d(x / e.LP);
}

double speed(const PathElement& e, double x)
{
    const double d = poly5_slope(e, x);
    return std::sqrt(1.0 + d * d);
}

double integrate(const PathElement& e, double a, double b)
{
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
        sum += kGLw[i] * (speed(e, mid - half * kGLx[i]) + speed(e, mid + half * kGLx[i]));
    }
    return half * sum;
}

std::vector<double> poly5_table(const PathElement& e)
{
    std::vector<double> t(kPanels + 1, 0.0);
    const double h = e.LP / kPanels;
    for (int i = 0; i < kPanels; ++i) {
        t[i + 1] = t[i] + integrate(e, i * h, (i + 1) * h);
    }
    return t;
}

Vector2d dir(double heading) { return {std::cos(heading), std::sin(heading)}; }
Vector2d normal(double heading) { return {-std::sin(heading), std::cos(heading)}; }

} // namespace

PathElement PathElement::line(double L)
{
    PathElement e;
    e.type = ElementType::Line;
    e.L = L;
    return e;
}

PathElement PathElement::arc(double Phi, double R, int sign)
{
    PathElement e;
    e.type = ElementType::Arc;
    e.Phi = Phi;
    e.R = R;
    e.sign = sign;
    return e;
}

PathElement PathElement::poly5(double LP, double WP, int sign)
{
    PathElement e;
    e.type = ElementType::Poly5;
    e.LP = LP;
    e.WP = WP;
    e.sign = sign;
    return e;
}

void PathElement::validate() const
{
    auto bad = [](const char* what) { throw InvalidInput(std::string("path element: ") + what); };
    if (sign != 1 && sign != -1) bad("sign must be +1 or -1");
    switch (type) {
    case ElementType::Line:
        if (!(L > 0.0)) bad("L must be > 0");
        break;
    case ElementType::Arc:
        if (!(Phi > 0.0)) bad("Phi must be > 0");
        if (!(R > 0.0)) bad("R must be > 0");
        break;
    case ElementType::Poly5:
        if (!(LP > 0.0)) bad("LP must be > 0");
        if (!(WP >= 0.0)) bad("WP must be >= 0");
        break;
    }
}

Path::Path(const Pose2& start, std::vector<PathElement> elements)
    : start_(start), elements_(std::move(elements))
{
    if (elements_.empty()) {
        throw InvalidInput("path needs at least one element");
    }
    Pose2 pose = start_;
    breaks_.push_back(0.0);
    for (const auto& e : elements_) {
        e.validate();
        Segment seg;
        seg.start = pose;
        const Vector2d p0(pose.x, pose.y);
        Vector2d p1;
        double h1 = pose.heading;
        switch (e.type) {
        case ElementType::Line:
            seg.length = e.L;
            p1 = p0 + e.L * dir(pose.heading);
            break;
        case ElementType::Arc:
            seg.length = e.Phi * e.R;
            p1 = p0 + e.R * std::sin(e.Phi) * dir(pose.heading) +
                 e.sign * e.R * (1.0 - std::cos(e.Phi)) * normal(pose.heading);
            h1 = pose.heading + e.sign * e.Phi;
            break;
        case ElementType::Poly5:
            seg.chord_s = poly5_table(e);
            seg.length = seg.chord_s.back();
            p1 = p0 + e.LP * dir(pose.heading) + e.sign * e.WP * normal(pose.heading);
            break;
        }
        segments_.push_back(std::move(seg));
        total_ += segments_.back().length;
        breaks_.push_back(total_);
        pose = {p1.x(), p1.y(), h1};
    }
    const double dh = std::remainder(pose.heading - start_.heading, 2.0 * kPi);
    closed_ = std::hypot(pose.x - start_.x, pose.y - start_.y) < 1e-6 && std::abs(dh) < 1e-9;
}

double Path::poly5_arclength(const PathElement& e, const std::vector<double>& table, double x)
{
    const double h = e.LP / kPanels;
    int j = static_cast<int>(x / h);
    j = std::clamp(j, 0, kPanels - 1);
    return table[j] + integrate(e, j * h, x);
}

double Path::poly5_chord(const PathElement& e, const std::vector<double>& table, double s)
{
    if (s <= 0.0) return 0.0;
    if (s >= table.back()) return e.LP;
    const auto it = std::upper_bound(table.begin(), table.end(), s);
    const int j = static_cast<int>(it - table.begin()) - 1;
    const double h = e.LP / kPanels;
    double x = (j + (s - table[j]) / (table[j + 1] - table[j])) * h;
    for (int it_n = 0; it_n < 20; ++it_n) {
        const double step = (poly5_arclength(e, table, x) - s) / speed(e, x);
        x = std::clamp(x - step, 0.0, e.LP);
        if (std::abs(step) < 1e-14) break;
    }
    return x;
}

double Path::normalize(double s, std::size_t& index, double& local) const
{
    if (closed_) {
        s -= std::floor(s / total_) * total_;
    } else if (s < -1e-12 || s > total_ + 1e-12) {
        throw OutOfRange("arc length " + std::to_string(s) + " outside [0, " +
                         std::to_string(total_) + "]");
    }
    s = std::clamp(s, 0.0, total_);
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
    index = static_cast<std::size_t>(it - breaks_.begin());
    index = std::min(index == 0 ? 0 : index - 1, elements_.size() - 1);
    local = std::min(s - breaks_[index], segments_[index].length);
    return s;
}

Vector2d Path::point_at(double s) const
{
    std::size_t i = 0;
    double ls = 0.0;
    normalize(s, i, ls);
    const auto& e = elements_[i];
    const auto& seg = segments_[i];
    const Vector2d p0(seg.start.x, seg.start.y);
    const double h = seg.start.heading;
    switch (e.type) {
    case ElementType::Line:
        return p0 + ls * dir(h);
    case ElementType::Arc: {
        const double a = ls / e.R;
        return p0 + e.R * std::sin(a) * dir(h) + e.sign * e.R * (1.0 - std::cos(a)) * normal(h);
    }
    case ElementType::Poly5: {
        const double x = poly5_chord(e, seg.chord_s, ls);
        return p0 + x * dir(h) + e.sign * e.WP * smooth(x / e.LP) * normal(h);
    }
    }
    return p0;
}

double Path::tangent_at(double s) const
{
    std::size_t i = 0;
    double ls = 0.0;
    normalize(s, i, ls);
    const auto& e = elements_[i];
    const auto& seg = segments_[i];
    switch (e.type) {
    case ElementType::Line:
        return seg.start.heading;
    case ElementType::Arc:
        return seg.start.heading + e.sign * ls / e.R;
    case ElementType::Poly5:
        return seg.start.heading + std::atan(poly5_slope(e, poly5_chord(e, seg.chord_s, ls)));
    }
    return seg.start.heading;
}

double Path::curvature_at(double s) const
{
    std::size_t i = 0;
    double ls = 0.0;
    normalize(s, i, ls);
    const auto& e = elements_[i];
    switch (e.type) {
    case ElementType::Line:
        return 0.0;
    case ElementType::Arc:
        return e.sign / e.R;
    case ElementType::Poly5: {
        const double x = poly5_chord(e, segments_[i].chord_s, ls);
        const double d1 = poly5_slope(e, x);
        const double d2 = e.sign * e.WP / (e.LP * e.LP) * smooth_dd(x / e.LP);
        return d2 / std::pow(1.0 + d1 * d1, 1.5);
    }
    }
    return 0.0;
}

Pose2 Path::end_pose() const
{
    const Vector2d p = closed_ ? Vector2d(start_.x, start_.y) : point_at(total_);
    const auto& last = elements_.back();
    double h = segments_.back().start.heading;
    if (last.type == ElementType::Arc) h += last.sign * last.Phi;
    return {p.x(), p.y(), std::remainder(h, 2.0 * kPi)};
}

NearestPoint nearest_on_path(const Path& path, PathCursor& cursor, const Vector2d& point)
{
    const double a = cursor.s_last;
    double b = cursor.s_last + cursor.window;
    if (!path.closed()) {
        b = std::min(b, path.length());
        if (a >= path.length()) {
            throw EndOfPath("cursor is at the end of the path");
        }
    }
    auto dist2 = [&](double s) { return (path.point_at(s) - point).squaredNorm(); };

    constexpr double h = 0.05;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / h)));
    const double step = (b - a) / n;
    double best_s = a;
    double best = dist2(a);
    for (int i = 1; i <= n; ++i) {
        const double s = a + i * step;
        const double d = dist2(s);
        if (d < best) {
            best = d;
            best_s = s;
        }
    }

    // Golden-section refinement inside the bracketing samples.
    double lo = std::max(a, best_s - step);
    double hi = std::min(b, best_s + step);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - r * (hi - lo);
    double x2 = lo + r * (hi - lo);
    double f1 = dist2(x1);
    double f2 = dist2(x2);
    while (hi - lo > 1e-10) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = dist2(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = dist2(x2);
        }
    }
    double s_star = 0.5 * (lo + hi);
    if (dist2(s_star) > best) {
        s_star = best_s;
    }
    if (!path.closed() && s_star >= path.length() - 1e-9) {
        throw EndOfPath("point has passed the end of the path");
    }

    NearestPoint np;
    np.s_star = s_star;
    np.point = path.point_at(s_star);
    const Vector2d off = point - np.point;
    np.t0 = off.norm();
    const double t = path.tangent_at(s_star);
    const double cross = std::cos(t) * off.y() - std::sin(t) * off.x();
    np.side = cross >= 0.0 ? 1 : -1;
    cursor.s_last = std::max(cursor.s_last, s_star);
    return np;
}

std::vector<double> preview_vector(const Path& path, double s_star, const Vector2d& P, double Psi,
                                   double ds, int n_prev)
{
    const Vector2d y_axis(-std::sin(Psi), std::cos(Psi));
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_prev) + 1);
    for (int k = 0; k <= n_prev; ++k) {
        const double s = s_star + k * ds;
        if (!path.closed() && s > path.length() + 1e-12) {
            throw EndOfPath("preview point beyond the end of the path");
        }
        out.push_back((path.point_at(s) - P).dot(y_axis));
    }
    return out;
}

namespace {

double element_length(const PathElement& e)
{
    switch (e.type) {
    case ElementType::Line:
        return e.L;
    case ElementType::Arc:
        return e.Phi * e.R;
    case ElementType::Poly5:
        return poly5_table(e).back();
    }
    return 0.0;
}

ElementType draw_type(Rng& rng, const ElementMix& mix)
{
    const double u = rng.uniform() * (mix.arc + mix.poly5 + mix.line);
    if (u < mix.arc) return ElementType::Arc;
    if (u < mix.arc + mix.poly5) return ElementType::Poly5;
    return ElementType::Line;
}

} // namespace

Path random_path(Rng& rng, const PathIntervals& iv, const Vector2d& start, double Psi,
                 double min_length, const ElementMix& mix)
{
    constexpr double kTilt = 5.0 * kPi / 180.0;
    const double heading = Psi + rng.uniform(-kTilt, kTilt);
    std::vector<PathElement> elements;
    double length = 0.0;
    while (length < min_length || elements.empty()) {
        ElementType type = draw_type(rng, mix);
        if (elements.empty()) {
            if (mix.poly5 + mix.line <= 0.0) {
                throw InvalidInput("random_path: element mix allows only arcs");
            }
            while (type == ElementType::Arc) type = draw_type(rng, mix);
        }
        PathElement e;
        switch (type) {
        case ElementType::Line:
            e = PathElement::line(rng.uniform(iv.L.lo, iv.L.hi));
            break;
        case ElementType::Arc: {
            const double Phi = rng.uniform(iv.Phi.lo, iv.Phi.hi);
            const double R = rng.uniform(iv.R.lo, iv.R.hi);
            e = PathElement::arc(Phi, R, rng.uniform() < mix.p_left ? 1 : -1);
            break;
        }
        case ElementType::Poly5: {
            const double LP = rng.uniform(iv.LP.lo, iv.LP.hi);
            const double WP = rng.uniform(iv.WP.lo, iv.WP.hi);
            e = PathElement::poly5(LP, WP, rng.uniform() < mix.p_left ? 1 : -1);
            break;
        }
        }
        length += element_length(e);
        elements.push_back(e);
    }
    return Path({start.x(), start.y(), heading}, std::move(elements));
}

Path benchmark_path()
{
    constexpr double a = 5.0;
    constexpr double half = kPi / 2.0;
    constexpr double quarter = kPi / 4.0;
    const double R_small = 2.0 * a;
    const double R_curve = 3.0 * a;

    std::vector<PathElement> e = {
        PathElement::line(4.0 * a),
        PathElement::arc(2.0 * kPi, R_small, 1),     // full circle
        PathElement::line(2.0 * a),
        PathElement::arc(quarter, R_small, 1),       // slalom
        PathElement::arc(half, R_small, -1),
        PathElement::arc(half, R_small, 1),
        PathElement::arc(quarter, R_small, -1),
        PathElement::line(2.0 * a),
        PathElement::poly5(4.0 * a, a, 1),           // lane change
        PathElement::line(2.0 * a),
        PathElement::arc(half, R_curve, 1),          // heading north
    };
    const Pose2 origin{0.0, 0.0, 0.0};
    const Pose2 corner = Path(origin, e).end_pose();

    // North leg, left curve, hard lane change west, west leg, two left curves
    // with a south leg in between; the leg lengths close the loop.
    const double north = 2.0 * a;
    const double hard_LP = 2.0 * a;
    const double hard_WP = a;
    const double west = corner.x - R_curve - hard_LP;
    const double south = corner.y + north + R_curve - hard_WP - 2.0 * R_curve;
    e.push_back(PathElement::line(north));
    e.push_back(PathElement::arc(half, R_curve, 1));
    e.push_back(PathElement::poly5(hard_LP, hard_WP, 1)); // hard lane change
    e.push_back(PathElement::line(west));
    e.push_back(PathElement::arc(half, R_curve, 1));
    e.push_back(PathElement::line(south));
    e.push_back(PathElement::arc(half, R_curve, 1));
    return Path(origin, std::move(e));
}

std::string format_path(const Path& path)
{
    std::ostringstream os;
    char buf[160];
    os << "# bikesim path\nversion 1\n";
    std::snprintf(buf, sizeof buf, "start %.17g %.17g %.17g\n", path.start().x, path.start().y,
                  path.start().heading);
    os << buf;
    for (const auto& e : path.elements()) {
        switch (e.type) {
        case ElementType::Line:
            std::snprintf(buf, sizeof buf, "LINE %.17g\n", e.L);
            break;
        case ElementType::Arc:
            std::snprintf(buf, sizeof buf, "ARC %.17g %.17g %d\n", e.Phi, e.R, e.sign);
            break;
        case ElementType::Poly5:
            std::snprintf(buf, sizeof buf, "POLY5 %.17g %.17g %d\n", e.LP, e.WP, e.sign);
            break;
        }
        os << buf;
    }
    return os.str();
}

Path parse_path(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    bool have_version = false;
    bool have_start = false;
    Pose2 start;
    std::vector<PathElement> elements;
    auto fail = [&](const std::string& msg) {
        throw ConfigError("path line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        auto read = [&](double& v) {
            if (!(ls >> v) || !std::isfinite(v)) fail("expected a number after " + key);
        };
        auto read_sign = [&](int& s) {
            if (!(ls >> s) || (s != 1 && s != -1)) fail("sign must be 1 or -1");
        };
        if (key == "version") {
            int v = 0;
            if (!(ls >> v) || v != 1) fail("unsupported version");
            have_version = true;
        } else if (!have_version) {
            fail("version line must come first");
        } else if (key == "start") {
            read(start.x);
            read(start.y);
            read(start.heading);
            have_start = true;
        } else if (!have_start) {
            fail("start line must precede elements");
        } else if (key == "LINE") {
            PathElement e = PathElement::line(0);
            read(e.L);
            elements.push_back(e);
        } else if (key == "ARC") {
            PathElement e = PathElement::arc(0, 0, 1);
            read(e.Phi);
            read(e.R);
            read_sign(e.sign);
            elements.push_back(e);
        } else if (key == "POLY5") {
            PathElement e = PathElement::poly5(0, 0, 1);
            read(e.LP);
            read(e.WP);
            read_sign(e.sign);
            elements.push_back(e);
        } else {
            fail("unknown directive '" + key + "'");
        }
        std::string extra;
        if (ls >> extra) fail("trailing input '" + extra + "'");
        if (!elements.empty()) {
            try {
                elements.back().validate();
            } catch (const InvalidInput& ex) {
                fail(ex.what());
            }
        }
    }
    if (!have_version || !have_start) throw ConfigError("path file missing version or start");
    if (elements.empty()) throw ConfigError("path file has no elements");
    return Path(start, std::move(elements));
}

Path load_path(const std::string& file)
{
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open path file " + file);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_path(ss.str());
}

void save_path(const Path& path, const std::string& file)
{
    std::ofstream out(file);
    if (!out) throw ConfigError("cannot write path file " + file);
    out << format_path(path);
}

} // namespace bikesim
