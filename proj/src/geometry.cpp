#include "increloc/geometry.hpp"

namespace increloc {

double normalize_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::remainder(theta, two_pi);  // [-pi, pi]
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

Pose2 compose(const Pose2& a, const Pose2& b) {
    return Pose2(a.theta() + b.theta(), a.rotate(b.translation()) + a.translation());
}

Pose2 inverse(const Pose2& p) {
    const Pose2 rot_inv(-p.theta(), Point2{});
    const Point2 t = rot_inv.rotate(p.translation());
    return Pose2(-p.theta(), Point2{-t.x, -t.y});
}

Point2 apply(const Pose2& p, Point2 q) { return p.rotate(q) + p.translation(); }

Pose2 transform_from_two_correspondences(Point2 f_a, Point2 f_b, Point2 l_a, Point2 l_b,
                                         double min_separation) {
    const Point2 df = f_b - f_a;
    if (squared_norm(df) < min_separation * min_separation) {
        throw DegenerateSample("feature pair closer than minimum separation");
    }
    const Point2 dl = l_b - l_a;
    const double theta = std::atan2(dl.y, dl.x) - std::atan2(df.y, df.x);
    const Pose2 rot(theta, Point2{});
    return Pose2(rot.theta(), l_a - rot.rotate(f_a));
}

}  // namespace increloc
