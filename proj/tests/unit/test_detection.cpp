#include "doctest.h"

#include "mcloop/detection.hpp"
#include "mcloop/errors.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

using namespace mcloop;

namespace {

ReceivedTrace ramp(std::size_t n, double dt) {
    ReceivedTrace t;
    t.dt_sample = dt;
    for (std::size_t i = 0; i < n; ++i) t.samples.push_back(static_cast<double>(i));
    t.t_record = dt * static_cast<double>(n - 1);
    return t;
}

// One frame per entry, with its minimum at the given index.
SymbolFrames frames_with_argmins(const std::vector<std::size_t>& argmins, std::size_t L) {
    SymbolFrames f;
    f.frame_length = L;
    for (auto a : argmins) {
        std::vector<double> fr(L, 1.0);
        fr[a] = 0.5;
        f.frames.push_back(fr);
    }
    return f;
}

std::size_t hamming(const Bits& a, const Bits& b) {
    std::size_t e = 0;
    for (std::size_t i = 0; i < a.size(); ++i) e += a[i] != b[i];
    return e;
}

const std::vector<double> kPilotD{0.9, 0.2, 0.2, 0.2, 0.9, 0.9, 0.2, 0.2, 0.9, 0.9};
const std::vector<double> kPilotDp{0, -0.70, 0.02, -0.04, 0.70, 0.03, -0.70, 0.02, 0.66, 0.01};

}  // namespace

TEST_SUITE("detection") {

TEST_CASE("partition") {
    const auto f = partition(ramp(15, 2), 10);
    CHECK(f.frame_length == 5);
    REQUIRE(f.n_symbols() == 3);
    CHECK(f.frames[1] == std::vector<double>{5, 6, 7, 8, 9});
    CHECK(partition(ramp(17, 2), 10).n_symbols() == 3);
    CHECK(partition(ramp(100, 2), 30).frame_length == 15);
    CHECK_THROWS_AS(partition(ramp(100, 2), 31), ConfigError);
}

TEST_CASE("sampling instant") {
    PilotSpec all1{Bits(5, 1)};
    CHECK(estimate_sampling_instant(frames_with_argmins({2, 3, 2, 3, 2}, 5), all1) == 2);
    CHECK(estimate_sampling_instant(frames_with_argmins({0, 4, 0}, 5), PilotSpec{{0, 1, 0}}) == 4);
    CHECK(estimate_sampling_instant(frames_with_argmins({1, 2, 3, 4}, 5), PilotSpec{Bits(4, 1)}) == 2);
    CHECK_THROWS_AS(estimate_sampling_instant(frames_with_argmins({1, 2}, 5), PilotSpec{{0, 0}}),
                    CalibrationError);
    CHECK_THROWS_AS(estimate_sampling_instant(frames_with_argmins({1}, 5), PilotSpec{{1, 1}}),
                    std::invalid_argument);
}

TEST_CASE("sample_symbols") {
    SymbolFrames f;
    f.frame_length = 2;
    f.frames = {{5, 1}, {4, 2}};
    CHECK(sample_symbols(f, 1) == std::vector<double>{1, 2});
    CHECK(sample_symbols(f, 0) == std::vector<double>{5, 4});
    CHECK_THROWS_AS(sample_symbols(f, 2), std::out_of_range);
}

TEST_CASE("basic detector calibration") {
    const PilotSpec p;
    CHECK(calibrate_bd(kPilotD, p) == 0.9);
    CHECK(calibrate_bd(std::vector<double>(10, 0.4), p) == 0.4);

    std::vector<double> sep;
    for (auto b : p.bits) sep.push_back(b ? 0.3 : 1.0);
    const double xi = calibrate_bd(sep, p);
    CHECK(detect_bd(sep, xi, 0) == p.bits);
}

TEST_CASE("basic detector") {
    CHECK(detect_bd(std::vector<double>{0.9, 0.1}, 0.5, 0) == Bits{0, 1});
    CHECK(detect_bd(std::vector<double>{0.5}, 0.5, 0) == Bits{0});
    CHECK(detect_bd(std::vector<double>{0.9, 0.9, 0.1}, 0.5, 2) == Bits{1});

    std::vector<double> drift;
    for (int i = 0; i < 50; ++i) drift.push_back(0.8 - 0.01 * i);
    CHECK(detect_bd(drift, 0.85, 0) == Bits(50, 1));
}

TEST_CASE("differentiate") {
    const auto dp = differentiate(std::vector<double>{0.9, 0.2, 0.22});
    REQUIRE(dp.size() == 3);
    CHECK(dp[0] == 0.0);
    CHECK(dp[1] == doctest::Approx(-0.7));
    CHECK(dp[2] == doctest::Approx(0.02));
    CHECK(differentiate(std::vector<double>(7, 3.0)) == std::vector<double>(7, 0.0));
    CHECK(differentiate(std::vector<double>{}).empty());
}

TEST_CASE("differential detector calibration") {
    const PilotSpec p;
    CHECK(repeat_indices(p) == std::vector<std::size_t>{2, 3, 5, 7, 9});
    CHECK(calibrate_dd(kPilotDp, p) == 0.04);
    CHECK(calibrate_dd(std::vector<double>(10, 0.0), p) == 0.0);
    CHECK_THROWS_AS(calibrate_dd(std::vector<double>(4, 0.0), PilotSpec{{0, 1, 0, 1}}), CalibrationError);
}

TEST_CASE("differential detector") {
    const PilotSpec p;  // ends with 0
    auto run = [&](std::vector<double> tail, double xi) {
        std::vector<double> dp(p.size(), 0.0);
        dp.insert(dp.end(), tail.begin(), tail.end());
        return detect_dd(dp, xi, p);
    };
    CHECK(run({-0.65}, 0.04) == Bits{1});
    CHECK(run({0.01}, 0.04) == Bits{0});
    CHECK(run({-0.65, 0.01, 0.70}, 0.04) == Bits{1, 1, 0});
    CHECK(run({0.0}, 0.0) == Bits{0});
    CHECK(run({-0.04}, 0.04) == Bits{0});
}

TEST_CASE("evaluate") {
    const Bits a = Bits(500, 1);
    CHECK(evaluate(a, a).ser == 0.0);
    Bits b = a;
    b[17] = 0;
    b[300] = 0;
    const auto t = evaluate(b, a);
    CHECK(t.ser == doctest::Approx(0.004));
    CHECK(t.errors() == 2);
    CHECK(std::is_sorted(t.errors_cumulative.begin(), t.errors_cumulative.end()));
    CHECK(t.errors_cumulative[16] == 0);
    CHECK(t.errors_cumulative[17] == 1);
    CHECK(evaluate(Bits(500, 0), a).ser == 1.0);
    CHECK_THROWS_AS(evaluate(Bits(3, 0), Bits(4, 0)), std::invalid_argument);
    CHECK_THROWS_AS(evaluate(Bits{}, Bits{}), std::invalid_argument);
}

TEST_CASE("differential detector ignores a constant offset") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> q(0, 64);
    const PilotSpec p;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> d;
        for (int i = 0; i < 60; ++i) d.push_back(q(rng) / 64.0);
        std::vector<double> shifted = d;
        for (auto& v : shifted) v += 8.0;
        const auto a = differentiate(d), b = differentiate(shifted);
        CHECK(a == b);
        CHECK(detect_dd(a, calibrate_dd(a, p), p) == detect_dd(b, calibrate_dd(b, p), p));
    }
}

TEST_CASE("BD threshold is Hamming-optimal over every real threshold") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    const PilotSpec p;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> d;
        for (std::size_t i = 0; i < p.size(); ++i) d.push_back(u(rng));
        const double xi = calibrate_bd(d, p);
        const std::size_t best = hamming(detect_bd(d, xi, 0), p.bits);
        // Any threshold lies in a gap between sorted samples or beyond them.
        std::vector<double> s = d;
        std::sort(s.begin(), s.end());
        s.push_back(2.0);
        for (double cand : s) CHECK(hamming(detect_bd(d, cand, 0), p.bits) >= best);
        for (double v : d)
            if (hamming(detect_bd(d, v, 0), p.bits) == best) CHECK(xi <= v);
    }
}

TEST_CASE("pilot consistency") {
    const PilotSpec p;
    std::vector<double> d;
    for (auto b : p.bits) d.push_back(b ? 0.2 : 0.9);
    const auto dp = differentiate(d);
    CHECK(detect_bd(d, calibrate_bd(d, p), 0) == p.bits);
    // Re-running DD over the pilot itself, seeded with its first bit.
    const PilotSpec head{{p.bits[0]}};
    CHECK(detect_dd(dp, calibrate_dd(dp, p), head) == Bits(p.bits.begin() + 1, p.bits.end()));
}

TEST_CASE("full chain on a synthetic trace") {
    const PilotSpec p;
    const Bits data{1, 0, 0, 1, 1, 0, 1};
    Bits all = p.bits;
    all.insert(all.end(), data.begin(), data.end());

    ReceivedTrace tr;
    tr.dt_sample = 2.0;
    for (auto b : all)
        for (int k = 0; k < 5; ++k) tr.samples.push_back(1.0 - (b && k == 3 ? 0.3 : 0.0) - 0.001 * k);
    tr.samples.push_back(1.0);  // trailing partial frame
    tr.t_record = tr.dt_sample * static_cast<double>(tr.samples.size() - 1);

    for (auto which : {Detector::basic, Detector::differential}) {
        const auto r = detect(tr, 10.0, p, which, data);
        CHECK(r.k_p == 3);
        CHECK(r.estimates == data);
        REQUIRE(r.tally);
        CHECK(r.tally->errors() == 0);
    }
    const auto dd = detect(tr, 10.0, p, Detector::differential);
    CHECK_FALSE(dd.tally);
    CHECK(dd.d_prime.size() == dd.d.size());
}

}
