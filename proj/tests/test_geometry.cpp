#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "increloc/geometry.hpp"
#include "increloc/rng.hpp"

using namespace increloc;
using std::numbers::pi;

namespace {

// Independent reference: treat points as complex numbers, the rotation is the
// unit phase of (l_b - l_a) / (f_b - f_a).
Pose2 complex_oracle(Point2 fa, Point2 fb, Point2 la, Point2 lb) {
    using C = std::complex<double>;
    const C df(fb.x - fa.x, fb.y - fa.y);
    const C dl(lb.x - la.x, lb.y - la.y);
    const C rot = std::polar(1.0, std::arg(dl / df));
    const C t = C(la.x, la.y) - rot * C(fa.x, fa.y);
    return Pose2(std::arg(rot), Point2{t.real(), t.imag()});
}

}  // namespace

TEST_CASE("normalize_angle maps into (-pi, pi]") {
    CHECK(normalize_angle(0.0) == 0.0);
    CHECK(normalize_angle(pi) == doctest::Approx(pi));
    CHECK(normalize_angle(-pi) == doctest::Approx(pi));
    CHECK(normalize_angle(3.0 * pi) == doctest::Approx(pi));
    CHECK(normalize_angle(2.0 * pi + 0.25) == doctest::Approx(0.25));
    CHECK(normalize_angle(-2.0 * pi - 0.25) == doctest::Approx(-0.25));
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
        const double a = normalize_angle(uniform(rng, -100.0, 100.0));
        CHECK(a > -pi);
        CHECK(a <= pi);
    }
}

TEST_CASE("compose, inverse and apply") {
    const Pose2 a(1.0, 2.0, pi / 2);
    CHECK(apply(a, {1.0, 0.0}).x == doctest::Approx(1.0));
    CHECK(apply(a, {1.0, 0.0}).y == doctest::Approx(3.0));

    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const Pose2 p(uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -pi, pi));
        const Pose2 q(uniform(rng, -50, 50), uniform(rng, -50, 50), uniform(rng, -pi, pi));
        const Point2 x{uniform(rng, -10, 10), uniform(rng, -10, 10)};
        const Point2 lhs = apply(compose(p, q), x);
        const Point2 rhs = apply(p, apply(q, x));
        CHECK(distance(lhs, rhs) < 1e-9);
        const Pose2 id = compose(p, inverse(p));
        CHECK(norm(id.translation()) < 1e-9);
        CHECK(angle_error(id.theta(), 0.0) < 1e-12);
    }
}

TEST_CASE("two-correspondence transform: worked example") {
    const Pose2 psi = transform_from_two_correspondences({0, 0}, {1, 0}, {5, 5}, {5, 6});
    CHECK(psi.theta() == doctest::Approx(pi / 2));
    CHECK(psi.translation().x == doctest::Approx(5.0));
    CHECK(psi.translation().y == doctest::Approx(5.0));
    const Point2 mapped = apply(psi, {1, 0});
    CHECK(mapped.x == doctest::Approx(5.0));
    CHECK(mapped.y == doctest::Approx(6.0));
}

TEST_CASE("two-correspondence transform is exact on f_a and matches the complex oracle") {
    Rng rng(12345);
    for (int i = 0; i < 2000; ++i) {
        const Point2 fa{uniform(rng, -20, 20), uniform(rng, -20, 20)};
        const Point2 fb{uniform(rng, -20, 20), uniform(rng, -20, 20)};
        if (distance(fa, fb) < 0.1) continue;
        // l_b is not necessarily congruent: only the direction is matched.
        const Point2 la{uniform(rng, -400, 400), uniform(rng, -100, 100)};
        const Point2 lb{uniform(rng, -400, 400), uniform(rng, -100, 100)};
        if (distance(la, lb) < 0.1) continue;
        const Pose2 psi = transform_from_two_correspondences(fa, fb, la, lb);
        const Pose2 ref = complex_oracle(fa, fb, la, lb);
        CHECK(distance(apply(psi, fa), la) < 1e-9);
        CHECK(angle_error(psi.theta(), ref.theta()) < 1e-9);
        CHECK(distance(psi.translation(), ref.translation()) < 1e-7);
    }
}

TEST_CASE("degenerate feature pairs are rejected") {
    CHECK_THROWS_AS(transform_from_two_correspondences({0, 0}, {0.01, 0}, {1, 1}, {2, 2}), DegenerateSample);
    CHECK_THROWS_AS(transform_from_two_correspondences({3, 3}, {3, 3}, {1, 1}, {2, 2}), DegenerateSample);
    CHECK_NOTHROW(transform_from_two_correspondences({0, 0}, {0.2, 0}, {1, 1}, {2, 2}));
}

TEST_CASE("rng streams are reproducible and independent by name") {
    Rng a = make_stream(42, "sensor");
    Rng b = make_stream(42, "sensor");
    Rng c = make_stream(42, "odometry");
    Rng d = make_stream(43, "sensor");
    const auto va = a();
    CHECK(va == b());
    CHECK(va != c());
    CHECK(va != d());
    CHECK(gaussian(a, 0.0) == 0.0);
}
