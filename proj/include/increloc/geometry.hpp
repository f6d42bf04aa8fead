#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace increloc {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point2 a, Point2 b) = default;
};

inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double squared_norm(Point2 p) { return p.x * p.x + p.y * p.y; }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }
inline double squared_distance(Point2 a, Point2 b) { return squared_norm(a - b); }

/// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

/// Planar rigid transform: x' = R(theta) x + t.
///
/// Used both for robot poses and for the local-to-global map transform.
class Pose2 {
public:
    Pose2() = default;
    Pose2(double theta, Point2 t) : theta_(normalize_angle(theta)), t_(t) {}
    Pose2(double x, double y, double theta) : Pose2(theta, Point2{x, y}) {}

    static Pose2 identity() { return {}; }

    double theta() const { return theta_; }
    Point2 translation() const { return t_; }

    Point2 rotate(Point2 q) const {
        const double c = std::cos(theta_);
        const double s = std::sin(theta_);
        return {c * q.x - s * q.y, s * q.x + c * q.y};
    }

    friend bool operator==(const Pose2&, const Pose2&) = default;

private:
    double theta_ = 0.0;
    Point2 t_{};
};

/// Result applies b first, then a.
Pose2 compose(const Pose2& a, const Pose2& b);
Pose2 inverse(const Pose2& p);
Point2 apply(const Pose2& p, Point2 q);

/// Minimum feature separation accepted by transform_from_two_correspondences.
inline constexpr double kMinPairSeparation = 0.05;

class DegenerateSample : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Orientation-preserving rigid transform taking f_a exactly onto l_a and the
/// direction (f_b - f_a) onto (l_b - l_a). Throws DegenerateSample when the
/// two features are closer than `min_separation`.
Pose2 transform_from_two_correspondences(Point2 f_a, Point2 f_b, Point2 l_a, Point2 l_b,
                                         double min_separation = kMinPairSeparation);

/// Rotation difference wrapped into [0, pi].
inline double angle_error(double a, double b) { return std::abs(normalize_angle(a - b)); }

}  // namespace increloc
