#include <doctest.h>

#include <cmath>
#include <numeric>

#include "plnav/error.hpp"
#include "plnav/image_io.hpp"
#include "plnav/pseudolaser.hpp"
#include "test_helpers.hpp"

using namespace plnav;

namespace {

PseudoLaser scan_of(std::vector<double> r, double max_range = 10.0) { return {std::move(r), max_range}; }

// Brute-force pooling oracle: per column, minimum nonzero value over rows ceil(H/2)..H-1.
std::vector<double> brute_pool(const Grid<double>& g, double max_range)
{
    std::vector<double> out(g.cols(), max_range);
    const std::size_t first = g.rows() / 2 + g.rows() % 2;
    for (std::size_t c = 0; c < g.cols(); ++c) {
        bool any = false;
        double best = 0.0;
        for (std::size_t r = first; r < g.rows(); ++r) {
            const double v = g(r, c);
            if (v == 0.0)
                continue;
            if (!any || v < best)
                best = v;
            any = true;
        }
        if (any)
            out[c] = best;
    }
    return out;
}

} // namespace

TEST_CASE("apply_mask multiplies elementwise and checks shapes")
{
    DepthFrame d{Grid<double>(2, 2, std::vector<double>{1, 2, 3, 4}), 10.0};
    SemanticMask m{Grid<std::uint8_t>(2, 2, std::vector<std::uint8_t>{1, 0, 0, 1})};
    const SemanticDepth sd = apply_mask(d, m);
    CHECK(sd.values == Grid<double>(2, 2, std::vector<double>{1, 0, 0, 4}));
    SemanticMask wrong{Grid<std::uint8_t>(3, 2, 1)};
    CHECK_THROWS_AS(apply_mask(d, wrong), ShapeError);
}

TEST_CASE("slice_min_pool matches brute force on random masked grids")
{
    Rng rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const auto rows = static_cast<std::size_t>(uniform(rng, 1.0, 41.0));
        const auto cols = static_cast<std::size_t>(uniform(rng, 1.0, 41.0));
        Grid<double> g(rows, cols);
        const double p_zero = uniform(rng, 0.0, 1.0);
        for (double& v : g.data())
            v = uniform(rng, 0.0, 1.0) < p_zero ? 0.0 : uniform(rng, 0.01, 10.0);
        CHECK(slice_min_pool({g}, 10.0).ranges == brute_pool(g, 10.0));
    }
}

TEST_CASE("pooling ignores the upper half and empty columns report max range")
{
    Grid<double> g(4, 3, 0.0);
    g(0, 0) = 0.5; // upper half: ignored
    g(2, 1) = 3.0;
    g(3, 1) = 2.0;
    g(3, 2) = 7.0;
    const PseudoLaser p = slice_min_pool({g}, 9.0);
    CHECK(p.ranges == std::vector<double>{9.0, 2.0, 7.0});
    CHECK(lower_half_begin(5) == 3);
    CHECK(lower_half_begin(4) == 2);
}

TEST_CASE("naive row slice")
{
    Grid<double> g(3, 3, 0.0);
    g(1, 0) = 4.0;
    const PseudoLaser p = naive_row_slice({g}, 1, 10.0);
    CHECK(p.ranges == std::vector<double>{4.0, 10.0, 10.0});
    CHECK_THROWS_AS(naive_row_slice({g}, 3, 10.0), UsageError);
}

TEST_CASE("boundary detection and windows")
{
    const PseudoLaser s = scan_of({2, 2, 2, 2, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5, 5});
    CHECK(detect_boundaries(s, 0.5) == std::vector<std::size_t>{3});
    NoiseConfig cfg;
    cfg.radius = 2;
    CHECK(boundary_windows(s, cfg) == std::vector<Window>{{2, 5}});
    cfg.radius = 8;
    CHECK(boundary_windows(s, cfg) == std::vector<Window>{{0, 11}});
    // Differences equal to alpha are not boundaries.
    CHECK(detect_boundaries(scan_of({1.0, 1.5, 2.0}), 0.5).empty());
}

TEST_CASE("overlapping and touching windows merge")
{
    std::vector<double> r(30, 2.0);
    r[10] = 6.0; // boundaries at 9 and 10
    r[20] = 6.0; // boundaries at 19 and 20
    NoiseConfig cfg;
    cfg.radius = 3;
    // Windows [7,12], [8,13], [17,22], [18,23] -> [7,13], [17,23].
    CHECK(boundary_windows(scan_of(r), cfg) == std::vector<Window>{{7, 13}, {17, 23}});
    cfg.radius = 4;
    // [6,13] [7,14] [16,23] [17,24]: 14 + 1 < 16, stays split.
    CHECK(boundary_windows(scan_of(r), cfg) == std::vector<Window>{{6, 14}, {16, 24}});
    cfg.radius = 5;
    // [5,14] ... [15,24]: touching windows merge.
    CHECK(boundary_windows(scan_of(r), cfg) == std::vector<Window>{{5, 25}});
}

TEST_CASE("interpolation is exactly linear between the window endpoints")
{
    std::vector<double> r(20);
    for (std::size_t k = 0; k < r.size(); ++k)
        r[k] = k < 10 ? 1.0 : 4.0;
    NoiseConfig cfg;
    cfg.radius = 3;
    const PseudoLaser out = interpolate_boundaries(scan_of(r), cfg);
    // Boundary at 9 -> window [7, 12]; endpoints r[6] = 1 and r[13] = 4.
    for (std::size_t k = 7; k <= 12; ++k)
        CHECK(out.ranges[k] == 1.0 + 3.0 * static_cast<double>(k - 6) / 7.0);
    for (std::size_t k : {0, 6, 13, 19})
        CHECK(out.ranges[k] == r[k]);
}

TEST_CASE("windows touching an end are filled with the single endpoint")
{
    const PseudoLaser s = scan_of({5, 1, 1, 1, 1, 1, 1, 1});
    NoiseConfig cfg;
    cfg.radius = 2;
    const PseudoLaser out = interpolate_boundaries(s, cfg);
    CHECK(out.ranges == std::vector<double>{1, 1, 1, 1, 1, 1, 1, 1});
}

TEST_CASE("zero-config augmentation is the identity")
{
    Rng rng(1);
    std::vector<double> r;
    for (int k = 0; k < 64; ++k)
        r.push_back(uniform(rng, 0.1, 9.9));
    NoiseConfig off;
    off.interpolate = false;
    off.gaussian = false;
    CHECK(augment(scan_of(r), off, rng).ranges == r);
    NoiseConfig zero_scale;
    zero_scale.interpolate = false;
    zero_scale.scale = 0.0;
    CHECK(augment(scan_of(r), zero_scale, rng).ranges == r);
}

TEST_CASE("gaussian stage has the configured spread")
{
    Rng rng(2);
    NoiseConfig cfg;
    const PseudoLaser flat = scan_of(std::vector<double>(8, 2.0));
    double sum = 0, sum_sq = 0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const double v = augment(flat, cfg, rng).ranges[3];
        sum += v;
        sum_sq += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    CHECK(mean == doctest::Approx(2.0).epsilon(0.01));
    CHECK(sd == doctest::Approx(0.14).epsilon(0.05));
}

TEST_CASE("variance-proportional noise model")
{
    Rng rng(3);
    NoiseConfig cfg;
    cfg.model = NoiseModel::VarianceProportional;
    cfg.scale = 0.02;
    const PseudoLaser flat = scan_of(std::vector<double>(4, 2.0));
    double sum_sq = 0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
        const double d = augment(flat, cfg, rng).ranges[1] - 2.0;
        sum_sq += d * d;
    }
    CHECK(sum_sq / n == doctest::Approx(0.04).epsilon(0.05));
}

TEST_CASE("augmentation clamps into the valid range and leaves windows noise-free")
{
    Rng rng(5);
    NoiseConfig cfg;
    cfg.scale = 5.0;
    cfg.radius = 2;
    std::vector<double> r(16, 9.5);
    for (std::size_t k = 8; k < 16; ++k)
        r[k] = 1.0;
    const PseudoLaser clean = interpolate_boundaries(scan_of(r), cfg);
    for (int trial = 0; trial < 50; ++trial) {
        const PseudoLaser out = augment(scan_of(r), cfg, rng);
        for (double v : out.ranges) {
            CHECK(v >= kMinRange);
            CHECK(v <= 10.0);
        }
        for (std::size_t k = 6; k <= 9; ++k)
            CHECK(out.ranges[k] == clean.ranges[k]);
    }
}

TEST_CASE("noise config validation")
{
    NoiseConfig cfg;
    cfg.radius = 0;
    CHECK_THROWS_AS(cfg.validate(), InvariantError);
    cfg = {};
    cfg.alpha = 0;
    CHECK_THROWS_AS(cfg.validate(), InvariantError);
    cfg = {};
    cfg.scale = -1;
    CHECK_THROWS_AS(cfg.validate(), InvariantError);
}

TEST_CASE("goal polar coordinates in the robot frame")
{
    const auto g = goal_in_robot_frame({{1, 1}, std::numbers::pi / 2}, {1, 3});
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(0.0));
    const auto left = goal_in_robot_frame({{0, 0}, 0.0}, {0, 2});
    CHECK(left[1] == doctest::Approx(std::numbers::pi / 2));
}

TEST_CASE("scan history replicates the first scan and rolls")
{
    ScanHistory h;
    CHECK_THROWS_AS(h.stacked(), UsageError);
    h.push(scan_of({1, 1}));
    auto st = h.stacked();
    CHECK(st[0].ranges == st[2].ranges);
    h.push(scan_of({2, 2}));
    h.push(scan_of({3, 3}));
    h.push(scan_of({4, 4}));
    st = h.stacked();
    CHECK(st[0].ranges[0] == 2);
    CHECK(st[2].ranges[0] == 4);

    const Observation obs = build_observation(st, {5.0, 0.5}, 0.3, -0.2);
    CHECK(obs.width == 2);
    CHECK(obs.scans == std::vector<double>{0.2, 0.2, 0.3, 0.3, 0.4, 0.4});
    CHECK(obs.goal_distance == 5.0);
    std::array<PseudoLaser, 3> ragged{scan_of({1}), scan_of({1, 2}), scan_of({1})};
    CHECK_THROWS_AS(build_observation(ragged, {0, 0}, 0, 0), ShapeError);
}

TEST_CASE("depth and mask image round trips")
{
    const auto dir = test::scratch_dir("pseudolaser");
    DepthFrame d{Grid<double>(3, 5, 0.0), 10.0};
    for (std::size_t k = 0; k < d.values.size(); ++k)
        d.values.data()[k] = 0.7 * static_cast<double>(k);
    write_depth_pgm(dir / "d.pgm", d);
    const DepthFrame back = read_depth_pgm(dir / "d.pgm");
    CHECK(back.max_range == 10.0);
    for (std::size_t k = 0; k < d.values.size(); ++k)
        CHECK(back.values.data()[k] == doctest::Approx(d.values.data()[k]).epsilon(1e-4));

    SemanticMask m{Grid<std::uint8_t>(3, 11, 0)};
    m.values(0, 0) = 1;
    m.values(2, 10) = 1;
    m.values(1, 7) = 1;
    write_mask_pbm(dir / "m.pbm", m);
    CHECK(read_mask_pbm(dir / "m.pbm").values == m.values);
    CHECK_THROWS_AS(read_mask_pbm(dir / "missing.pbm"), IoError);
}
