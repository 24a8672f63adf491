#include "doctest.h"

#include <cmath>
#include <vector>

#include "rbd/dsp/wavelet.hpp"
#include "rbd/util/rng.hpp"

using namespace rbd;
using namespace rbd::dsp;

TEST_CASE("Haar details vanish on a constant signal") {
    const std::vector<double> x(64, 3.25);
    const auto c = dwt(x, Wavelet::Haar, 4);
    for (const auto& level : c.details)
        for (double v : level) CHECK(std::fabs(v) < 1e-12);
}

TEST_CASE("Haar perfectly reconstructs an impulse (power-of-two length)") {
    std::vector<double> x(128, 0.0);
    x[37] = 1.0;
    const auto c = dwt(x, Wavelet::Haar, 4);
    const auto back = idwt(c);
    REQUIRE(back.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(std::fabs(back[i] - x[i]) < 1e-9);
}

TEST_CASE("DB2 perfectly reconstructs noise, including odd lengths") {
    Rng rng(21);
    for (std::size_t n : {256u, 2000u, 1999u}) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.normal();
        const auto c = dwt(x, Wavelet::Db2, 4);
        const auto back = idwt(c);
        REQUIRE(back.size() == x.size());
        double max_err = 0.0;
        for (std::size_t i = 0; i < n; ++i) max_err = std::max(max_err, std::fabs(back[i] - x[i]));
        CHECK(max_err < 1e-9);
    }
}

TEST_CASE("too-short signals and unknown wavelet names are rejected") {
    std::vector<double> x(8, 1.0);
    CHECK_THROWS_AS(dwt(x, Wavelet::Haar, 4), ArgumentError);
    CHECK_THROWS_AS(wavelet_from_name("sym5"), ArgumentError);
    CHECK(wavelet_from_name("haar") == Wavelet::Haar);
    CHECK(wavelet_from_name("DB2") == Wavelet::Db2);
}

TEST_CASE("detail-only reconstruction isolates one level") {
    Rng rng(22);
    std::vector<double> x(512);
    for (auto& v : x) v = rng.normal();
    const auto c = dwt(x, Wavelet::Haar, 4);
    // summing the four detail reconstructions plus the approx-only
    // reconstruction gives back the signal (linearity of the inverse)
    std::vector<double> acc(x.size(), 0.0);
    for (std::size_t level = 1; level <= 4; ++level) {
        const auto part = reconstruct_detail(c, level);
        for (std::size_t i = 0; i < x.size(); ++i) acc[i] += part[i];
    }
    DwtCoeffs approx_only = c;
    for (auto& d : approx_only.details)
        for (auto& v : d) v = 0.0;
    const auto smooth = idwt(approx_only);
    for (std::size_t i = 0; i < x.size(); ++i) acc[i] += smooth[i];
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(acc[i] == doctest::Approx(x[i]).epsilon(1e-9));
}
