#pragma once

#include <blochtomo/spectral.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

using blochtomo::cplx;
using blochtomo::Mat2;
using blochtomo::Vec3;

inline const std::vector<std::pair<double, double>>& paper_settings() {
    static const std::vector<std::pair<double, double>> s{
        {std::numbers::pi / 4, 0.9}, {1.3, 0.3}, {1.3, 0.6}, {1.3, 1.4}, {std::numbers::pi, 0.25}};
    return s;
}

inline std::filesystem::path golden_dir() { return BLOCHTOMO_GOLDEN_DIR; }

inline const nlohmann::json& oracles() {
    static const nlohmann::json j = [] {
        std::ifstream in(golden_dir() / "oracles.json");
        if (!in) throw std::runtime_error("missing oracles.json");
        return nlohmann::json::parse(in);
    }();
    return j;
}

inline cplx as_complex(const nlohmann::json& j) { return {j[0].get<double>(), j[1].get<double>()}; }

inline Mat2 as_matrix(const nlohmann::json& j) {
    Mat2 m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = as_complex(j[r][c]);
    return m;
}

// Fixed-seed generator shared by the property suites.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen_); }
    cplx complex_normal() { return {normal(), normal()}; }
    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
};

// Matrix equality up to a global sign.
inline double sign_blind_distance(const Mat2& a, const Mat2& b) {
    return std::min((a - b).norm(), (a + b).norm());
}

}  // namespace testsupport
