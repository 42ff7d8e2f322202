#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "ims3/csv.hpp"
#include "ims3/schedule.hpp"

using namespace ims3;

TEST_CASE("two-step schedule has exact closed-form tables") {
    const NoiseSchedule s = build_linear_schedule(2, 0.5, 0.5);
    CHECK(s.alpha_bar(1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s.alpha_bar(2) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s.sigma(1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.sigma(2) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(s.alpha_bar(0) == 1.0);
    CHECK(s.sigma(0) == 0.0);
}

TEST_CASE("default schedule matches an extended-precision product oracle") {
    const int T = 1000;
    const NoiseSchedule s = build_linear_schedule(T, 1e-4, 0.02);
    CHECK(s.alpha_bar(1) == doctest::Approx(0.9999).epsilon(1e-12));

    long double prod = 1.0L;
    for (int t = 0; t < T; ++t) {
        const long double beta = 1e-4L + (0.02L - 1e-4L) * static_cast<long double>(t) / (T - 1);
        prod *= 1.0L - beta;
        CHECK(std::abs(s.alpha_bar(t + 1) - static_cast<double>(prod)) < 1e-9);
    }
}

TEST_CASE("schedule monotonicity and variance-preserving identity") {
    const NoiseSchedule s = build_linear_schedule(1000, 1e-4, 0.02);
    for (int t = 1; t <= s.timesteps; ++t) {
        if (t > 1) {
            CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
            CHECK(s.sigma(t) > s.sigma(t - 1));
        }
        CHECK(s.alpha_bar(t) > 0.0);
        CHECK(s.alpha_bar(t) <= 1.0);
        const double sa = std::sqrt(s.alpha_bar(t));
        const double sb = std::sqrt(1.0 - s.alpha_bar(t));
        CHECK(std::abs(sa * sa + sb * sb - 1.0) < 1e-12);
    }
}

TEST_CASE("schedule bounds validation") {
    CHECK_THROWS_AS(build_linear_schedule(1, 1e-4, 0.02), InvalidScheduleBounds);
    CHECK_THROWS_AS(build_linear_schedule(10, 0.0, 0.02), InvalidScheduleBounds);
    CHECK_THROWS_AS(build_linear_schedule(10, 0.03, 0.02), InvalidScheduleBounds);
    CHECK_THROWS_AS(build_linear_schedule(10, 1e-4, 1.0), InvalidScheduleBounds);
}

TEST_CASE("timestep grid contracts") {
    const NoiseSchedule s = build_linear_schedule(1000, 1e-4, 0.02);

    const auto full = timestep_grid(s, 1000);
    REQUIRE(full.size() == 1000);
    for (int t = 1; t <= 1000; ++t) CHECK(full[t - 1] == t);

    const auto four = timestep_grid(s, 4);
    REQUIRE(four.size() == 4);
    CHECK(four.back() == 1000);
    for (std::size_t i = 1; i < four.size(); ++i) CHECK(four[i] > four[i - 1]);

    const auto one = timestep_grid(s, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 1000);

    CHECK_THROWS_AS(timestep_grid(s, 0), InvalidStepCount);
    CHECK_THROWS_AS(timestep_grid(s, 1001), InvalidStepCount);
}

TEST_CASE("inversion grid collapses duplicates and ends at the target") {
    const auto g = inversion_grid(100, 8);
    CHECK(g.back() == 100);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    CHECK(g.front() >= 1);

    const auto tiny = inversion_grid(3, 8);
    CHECK(tiny.back() == 3);
    CHECK(tiny.size() <= 3);
}

TEST_CASE("schedule csv dump round-trips values") {
    const NoiseSchedule s = build_linear_schedule(50, 1e-3, 0.01);
    const auto path = std::filesystem::temp_directory_path() / "ims3_schedule_test.csv";
    write_schedule_csv(s, path);
    const CsvTable table = read_csv(path);
    REQUIRE(table.header == std::vector<std::string>{"t", "beta", "alpha_bar", "sigma"});
    REQUIRE(table.rows.size() == 50);
    CHECK(parse_double(table.rows[49][2]) == s.alpha_bar(50));
    std::filesystem::remove(path);
}
