#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "anchorloc/geometry.hpp"
#include "anchorloc/rng.hpp"

using namespace anchorloc;

namespace {

EulerAngles random_euler(CounterRng& rng, double limit = 1.2) {
    return {rng.uniform(-limit, limit), rng.uniform(-1.4, 1.4), rng.uniform(-limit, limit)};
}

double max_abs_diff(const Rotation& a, const Rotation& b) {
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    return worst;
}

} // namespace

TEST_CASE("euler_to_rotation identity and quarter-turn yaw") {
    Rotation id = euler_to_rotation({0.0, 0.0, 0.0});
    CHECK(max_abs_diff(id, Rotation::identity()) == doctest::Approx(0.0));

    // Rz(90 deg) maps x-hat onto y-hat.
    Rotation r = euler_to_rotation({0.0, 0.0, kPi / 2.0});
    Vec3 mapped = r * Vec3{1.0, 0.0, 0.0};
    CHECK(mapped.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mapped.y == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mapped.z == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rotation_to_euler inverts euler_to_rotation") {
    EulerAngles e{0.1, 0.2, 0.3};
    EulerAngles back = rotation_to_euler(euler_to_rotation(e));
    CHECK(back.roll == doctest::Approx(e.roll).epsilon(1e-9));
    CHECK(back.pitch == doctest::Approx(e.pitch).epsilon(1e-9));
    CHECK(back.yaw == doctest::Approx(e.yaw).epsilon(1e-9));

    EulerAngles z90 = rotation_to_euler(Rotation::about_z(kPi / 2.0));
    CHECK(z90.roll == doctest::Approx(0.0));
    CHECK(z90.pitch == doctest::Approx(0.0));
    CHECK(z90.yaw == doctest::Approx(kPi / 2.0));
}

TEST_CASE("gimbal lock resolves with zero roll") {
    EulerAngles locked{0.4, kPi / 2.0, 0.7};
    Rotation r = euler_to_rotation(locked);
    EulerAngles e = rotation_to_euler(r);
    CHECK(e.roll == 0.0);
    CHECK(e.pitch == doctest::Approx(kPi / 2.0));
    // Yaw absorbed the free angle; the matrix must still round-trip.
    CHECK(max_abs_diff(euler_to_rotation(e), r) < 1e-9);
}

TEST_CASE("euler/rotation round trips on random inputs") {
    CounterRng rng(7, 0);
    for (int i = 0; i < 500; ++i) {
        EulerAngles e = random_euler(rng);
        Rotation r = euler_to_rotation(e);
        CHECK(r.is_orthonormal(1e-9));
        EulerAngles back = rotation_to_euler(r);
        CHECK(max_abs_diff(euler_to_rotation(back), r) < 1e-9);
        CHECK(std::abs(back.roll - e.roll) < 1e-9);
        CHECK(std::abs(back.pitch - e.pitch) < 1e-9);
        CHECK(std::abs(back.yaw - e.yaw) < 1e-9);
    }
}

TEST_CASE("rotations preserve norms") {
    CounterRng rng(11, 0);
    for (int i = 0; i < 200; ++i) {
        Rotation r = euler_to_rotation(random_euler(rng, 3.0));
        Vec3 p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
        CHECK((r * p).norm() == doctest::Approx(p.norm()).epsilon(1e-12));
    }
}

TEST_CASE("spherical_to_point worked examples") {
    Point3 boresight = spherical_to_point({2.0, 0.0, 0.0});
    CHECK(boresight.x == doctest::Approx(0.0));
    CHECK(boresight.y == doctest::Approx(2.0));
    CHECK(boresight.z == doctest::Approx(0.0));

    Point3 right = spherical_to_point({1.0, kPi / 2.0, 0.0});
    CHECK(right.x == doctest::Approx(1.0));
    CHECK(right.y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(right.z == doctest::Approx(0.0));

    // r=2, az=30 deg, el=45 deg -> (2 sin30 cos45, 2 cos30 cos45, 2 sin45)
    Point3 p = spherical_to_point({2.0, deg2rad(30.0), deg2rad(45.0)});
    CHECK(p.x == doctest::Approx(0.70711).epsilon(1e-4));
    CHECK(p.y == doctest::Approx(1.22474).epsilon(1e-4));
    CHECK(p.z == doctest::Approx(1.41421).epsilon(1e-4));
}

TEST_CASE("point_to_spherical inverts and rejects out-of-view points") {
    SphericalFix s = point_to_spherical({0.0, 2.0, 0.0});
    CHECK(s.range == doctest::Approx(2.0));
    CHECK(s.azimuth == doctest::Approx(0.0));
    CHECK(s.elevation == doctest::Approx(0.0));

    SphericalFix deg = point_to_spherical({0.70711, 1.22474, 1.41421});
    CHECK(deg.range == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(rad2deg(deg.azimuth) == doctest::Approx(30.0).epsilon(1e-4));
    CHECK(rad2deg(deg.elevation) == doctest::Approx(45.0).epsilon(1e-4));

    CHECK_THROWS_AS((void)point_to_spherical({0.0, 0.0, 0.0}), std::domain_error);
    // y = 0 boundary (azimuth +-90 deg) is excluded.
    CHECK_THROWS_AS((void)point_to_spherical({1.0, 0.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS((void)point_to_spherical({0.0, -1.0, 0.0}), std::domain_error);
}

TEST_CASE("spherical round trip preserves the norm") {
    CounterRng rng(13, 0);
    for (int i = 0; i < 500; ++i) {
        SphericalFix s{rng.uniform(0.01, 10.0), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        Point3 p = spherical_to_point(s);
        CHECK(p.norm() == doctest::Approx(s.range).epsilon(1e-12));
        SphericalFix back = point_to_spherical(p);
        Point3 p2 = spherical_to_point(back);
        CHECK((p2 - p).norm() < 1e-9 * s.range);
    }
}

TEST_CASE("EulerAngles::normalized folds angles into their ranges") {
    EulerAngles e = EulerAngles{3.5, 0.1, -4.0}.normalized();
    CHECK(e.roll > -kPi);
    CHECK(e.roll <= kPi);
    CHECK(e.yaw > -kPi);
    CHECK(e.yaw <= kPi);

    // Over-the-top pitch folds back and flips the other axes.
    EulerAngles folded = EulerAngles{0.0, kPi / 2.0 + 0.2, 0.0}.normalized();
    CHECK(folded.pitch == doctest::Approx(kPi / 2.0 - 0.2));
    CHECK(std::abs(folded.roll) == doctest::Approx(kPi));
    // The normalized triple still encodes the same rotation.
    EulerAngles raw{0.3, kPi / 2.0 + 0.2, -0.4};
    Rotation a = euler_to_rotation(raw);
    Rotation b = euler_to_rotation(raw.normalized());
    CHECK(max_abs_diff(a, b) < 1e-9);
}

TEST_CASE("wrap_pi maps onto (-pi, pi]") {
    CHECK(wrap_pi(kPi) == doctest::Approx(kPi));
    CHECK(wrap_pi(-kPi) == doctest::Approx(kPi));
    CHECK(wrap_pi(3.0 * kPi) == doctest::Approx(kPi));
    CHECK(wrap_pi(deg2rad(358.0)) == doctest::Approx(deg2rad(-2.0)));
    CHECK(wrap_pi(0.25) == doctest::Approx(0.25));
}
