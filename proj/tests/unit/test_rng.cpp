#include <doctest.h>

#include <cmath>
#include <set>

#include "bhlab/rng.hpp"

using bhlab::mc::CounterRng;

TEST_CASE("counter rng reproduces streams exactly") {
    CounterRng a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams with different ids or seeds differ") {
    CounterRng a(42, 7), b(42, 8), c(43, 7);
    bool differ_stream = false, differ_seed = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u64();
        differ_stream |= va != b.next_u64();
        differ_seed |= va != c.next_u64();
    }
    CHECK(differ_stream);
    CHECK(differ_seed);
}

TEST_CASE("uniform stays in range and fills the unit interval") {
    CounterRng rng(1, 0);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 1e-4);
    CHECK(hi > 1.0 - 1e-4);
}

TEST_CASE("normal moments match the standard law") {
    CounterRng rng(17, 3);
    const int n = 400000;
    double m1 = 0, m2 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        m1 += z;
        m2 += z * z;
        m4 += z * z * z * z;
    }
    m1 /= n;
    m2 /= n;
    m4 /= n;
    CHECK(std::fabs(m1) < 0.01);
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(m4 == doctest::Approx(3.0).epsilon(0.03));
}

TEST_CASE("gaussian step has the requested variance and no correlation") {
    CounterRng rng(99, 5);
    const int n = 200000;
    const double dt = 0.37;
    double vx = 0, vy = 0, cxy = 0;
    for (int i = 0; i < n; ++i) {
        const auto g = rng.gaussian_step(dt);
        vx += g.x * g.x;
        vy += g.y * g.y;
        cxy += g.x * g.y;
    }
    CHECK(vx / n == doctest::Approx(dt).epsilon(0.02));
    CHECK(vy / n == doctest::Approx(dt).epsilon(0.02));
    CHECK(std::fabs(cxy / n) < 0.01 * dt);
}
