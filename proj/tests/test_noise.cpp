#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "noisebench/dataset.hpp"
#include "noisebench/noise.hpp"
#include "noisebench/rng.hpp"

using namespace noisebench;
namespace fs = std::filesystem;

TEST_CASE("zero strength is bit-identity for both kinds") {
    Rng rng(1);
    std::vector<double> values;
    for (int i = 0; i < 257; ++i) values.push_back(100.0 * rng.next_gaussian());

    CHECK(noise::apply_awgn(values, 0.0, 123) == values);
    CHECK(noise::apply_linear(values, 0.0) == values);
    CHECK(noise::apply(values, {noise::Kind::kNone, 999.0, 5}) == values);
}

TEST_CASE("awgn rejects negative sigma, linear rejects negative slope") {
    CHECK_THROWS(noise::apply_awgn({1.0}, -1.0, 0));
    CHECK_THROWS(noise::apply_linear({1.0}, -0.5));
}

TEST_CASE("awgn moments on a long zero vector") {
    const std::vector<double> zeros(100000, 0.0);
    const auto noisy = noise::apply_awgn(zeros, 40.0, 2718);
    CHECK(noisy.size() == zeros.size());
    const double m = data::mean_of(noisy);
    const double s = data::std_of(noisy);
    CHECK(s >= 39.6);
    CHECK(s <= 40.4);
    CHECK(std::abs(m) < 0.5);
}

TEST_CASE("awgn empirical moments converge for every paper strength") {
    const std::size_t n = 100000;
    const std::vector<double> zeros(n, 0.0);
    for (double sigma : {20.0, 40.0, 60.0, 80.0}) {
        const auto noisy = noise::apply_awgn(zeros, sigma, 1000 + static_cast<int>(sigma));
        CHECK(std::abs(data::std_of(noisy) - sigma) / sigma < 0.01);
        CHECK(std::abs(data::mean_of(noisy)) < 3.0 * sigma / std::sqrt(double(n)));
    }
}

TEST_CASE("awgn is deterministic in (input, sigma, seed)") {
    const std::vector<double> values(64, 3.5);
    CHECK(noise::apply_awgn(values, 20.0, 7) == noise::apply_awgn(values, 20.0, 7));
    CHECK(noise::apply_awgn(values, 20.0, 7) != noise::apply_awgn(values, 20.0, 8));
}

TEST_CASE("linear ramp follows slope * index") {
    const auto ramp = noise::apply_linear({0, 0, 0, 0, 0}, 0.2);
    REQUIRE(ramp.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(ramp[i] == 0.2 * i);  // exact on a zero input
        CHECK(ramp[i] == doctest::Approx(0.2 * i).epsilon(1e-15));
    }
    const auto shifted = noise::apply_linear({5, 5}, 0.8);
    CHECK(shifted[0] == 5.0);
    CHECK(shifted[1] == doctest::Approx(5.8).epsilon(1e-15));
}

TEST_CASE("linear x_scale reinterprets x as scaled index") {
    const auto out = noise::apply_linear({0, 0, 0, 0}, 0.6, 3.0);
    CHECK(out[3] == doctest::Approx(0.6));
    CHECK(out[1] == doctest::Approx(0.2));
}

TEST_CASE("linear noise adds: slope a then b equals slope a+b") {
    Rng rng(5);
    std::vector<double> values;
    for (int i = 0; i < 300; ++i) values.push_back(rng.next_gaussian());
    const auto ab = noise::apply_linear(noise::apply_linear(values, 0.3), 0.5);
    const auto sum = noise::apply_linear(values, 0.8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double scale = std::max(1.0, std::abs(sum[i]));
        CHECK(std::abs(ab[i] - sum[i]) / scale < 1e-12);
    }
}

TEST_CASE("corrupt_training_set leaves NONE untouched and is deterministic") {
    data::Window w1{{1, 2, 3, 4}, {0, "A"}, "r1"};
    data::Window w2{{5, 6, 7, 8}, {1, "B"}, "r2"};
    const std::vector<data::Window> windows{w1, w2};

    const auto same = noise::corrupt_training_set(windows, {noise::Kind::kNone, 0.0}, 9);
    REQUIRE(same.size() == 2);
    CHECK(same[0].values == w1.values);
    CHECK(same[1].values == w2.values);

    const auto a = noise::corrupt_training_set(windows, {noise::Kind::kAwgn, 20.0}, 42);
    const auto b = noise::corrupt_training_set(windows, {noise::Kind::kAwgn, 20.0}, 42);
    for (int i = 0; i < 2; ++i) {
        CHECK(a[i].values == b[i].values);
        CHECK(a[i].label.index == windows[i].label.index);
        CHECK(a[i].source_id == windows[i].source_id);
    }
    // different windows get different noise
    std::vector<double> d0(4), d1(4);
    for (int i = 0; i < 4; ++i) {
        d0[i] = a[0].values[i] - w1.values[i];
        d1[i] = a[1].values[i] - w2.values[i];
    }
    CHECK(d0 != d1);
}

TEST_CASE("corrupt_training_set applies the ramp to every window") {
    std::vector<data::Window> windows;
    Rng rng(17);
    for (int k = 0; k < 5; ++k) {
        data::Window w;
        w.label = {0, "A"};
        for (int i = 0; i < 32; ++i) w.values.push_back(rng.next_gaussian());
        windows.push_back(std::move(w));
    }
    const auto out = noise::corrupt_training_set(windows, {noise::Kind::kLinear, 0.4}, 1);
    for (int k = 0; k < 5; ++k) {
        for (int i = 0; i < 32; ++i) {
            const double delta = out[k].values[i] - windows[k].values[i];
            CHECK(delta == doctest::Approx(0.4 * i).epsilon(1e-12));
        }
    }
}

TEST_CASE("preview writes one column per spec") {
    const auto tmp = fs::temp_directory_path() /
                     ("noisebench_preview_" + std::to_string(::getpid()) + ".csv");
    data::SignalRecord record{"r", {}, 300.0, {0, "A"}};
    for (int i = 0; i < 400; ++i) record.samples.push_back(std::sin(0.1 * i));

    SUBCASE("NONE column equals the clean column") {
        noise::preview(record, {{noise::Kind::kNone, 0.0}}, tmp.string());
        std::ifstream in(tmp);
        std::string header;
        std::getline(in, header);
        CHECK(header == "index,clean,none");
        std::string line;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string index, clean, none;
            std::getline(ss, index, ',');
            std::getline(ss, clean, ',');
            std::getline(ss, none, ',');
            CHECK(clean == none);
        }
    }

    SUBCASE("four slopes give six columns") {
        noise::preview(record,
                       {{noise::Kind::kLinear, 0.2},
                        {noise::Kind::kLinear, 0.4},
                        {noise::Kind::kLinear, 0.6},
                        {noise::Kind::kLinear, 0.8}},
                       tmp.string());
        std::ifstream in(tmp);
        std::string header;
        std::getline(in, header);
        CHECK(header == "index,clean,linear_0.2,linear_0.4,linear_0.6,linear_0.8");
        int commas = 0;
        for (char c : header) commas += c == ',';
        CHECK(commas + 1 == 6);
    }

    SUBCASE("strong awgn column has larger std than the clean column") {
        noise::NoiseSpec spec{noise::Kind::kAwgn, 80.0, 5};
        noise::preview(record, {spec}, tmp.string());
        std::ifstream in(tmp);
        std::string line;
        std::getline(in, line);  // header
        std::vector<double> clean, noisy;
        while (std::getline(in, line)) {
            std::stringstream ss(line);
            std::string f;
            std::getline(ss, f, ',');
            std::getline(ss, f, ',');
            clean.push_back(std::stod(f));
            std::getline(ss, f, ',');
            noisy.push_back(std::stod(f));
        }
        CHECK(data::std_of(noisy) > data::std_of(clean));
    }

    fs::remove(tmp);
}
