#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "swincross/errors.hpp"
#include "swincross/fileutil.hpp"
#include "swincross/metrics.hpp"
#include "swincross/phantom.hpp"
#include "swincross/volume_io.hpp"
#include "test_support.hpp"

using namespace swincross;
using namespace swincross::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("swincross_test_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

Tensor<float> random_mask(const Shape& shape, std::mt19937_64& rng, double p) {
    std::bernoulli_distribution b(p);
    Tensor<float> t(shape);
    for (auto& v : t.mutable_data()) v = b(rng) ? 1.0f : 0.0f;
    return t;
}

}  // namespace

TEST_CASE("volume write and read round trip bitwise") {
    TempDir dir("vol");
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(seed);
        Volume v;
        const std::size_t c = 1 + seed % 3;
        v.data = random_tensor<float>({1 + seed % 4, 2 + seed % 5, 3, c}, rng, -1e3, 1e3);
        v.spacing = {0.5 + static_cast<double>(seed), 1.25, 3.0};
        for (std::size_t i = 0; i < c; ++i) v.channel_names.push_back("ch" + std::to_string(i));
        const auto stem = (dir.path / ("v" + std::to_string(seed))).string();
        write_volume(stem, v);
        const auto back = read_volume(stem + ".vol.json");
        REQUIRE(back.data.shape() == v.data.shape());
        CHECK(std::memcmp(back.data.data().data(), v.data.data().data(), v.data.numel() * sizeof(float)) == 0);
        CHECK(back.spacing == v.spacing);
        CHECK(back.channel_names == v.channel_names);
    }
}

TEST_CASE("volume payload is little-endian f32 in row-major [H,W,D,C] order") {
    TempDir dir("layout");
    Volume v;
    std::vector<float> values(8);
    for (std::size_t i = 0; i < 8; ++i) values[i] = static_cast<float>(i) + 0.5f;
    v.data = Tensor<float>({2, 2, 2, 1}, values);
    const auto stem = (dir.path / "cube").string();
    write_volume(stem, v);
    const auto bytes = read_file(stem + ".vol.bin");
    REQUIRE(bytes.size() == 32);
    for (std::size_t i = 0; i < 8; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
        float f;
        std::memcpy(&f, &bits, 4);
        CHECK(f == values[i]);
    }
    const auto meta = nlohmann::json::parse(read_file(stem + ".vol.json"));
    CHECK(meta.at("shape") == nlohmann::json({2, 2, 2, 1}));
    CHECK(meta.at("dtype") == "f32");
    CHECK(meta.at("endianness") == "little");
}

TEST_CASE("volume stems and read errors") {
    CHECK(volume_stem("a/b") == "a/b");
    CHECK(volume_stem("a/b.vol.json") == "a/b");
    CHECK(volume_stem("a/b.vol.bin") == "a/b");

    TempDir dir("vol_err");
    const auto stem = (dir.path / "x").string();
    CHECK_THROWS_AS(read_volume(stem), FormatError);
    Volume v;
    v.data = Tensor<float>({2, 2, 2, 2}, 1.0f);
    write_volume(stem, v);
    const auto meta = nlohmann::json::parse(read_file(stem + ".vol.json"));

    SUBCASE("truncated payload") {
        fs::resize_file(stem + ".vol.bin", 60);
        CHECK_THROWS_AS(read_volume(stem), FormatError);
    }
    SUBCASE("unknown dtype") {
        auto m = meta;
        m["dtype"] = "f16";
        write_file_atomic(stem + ".vol.json", m.dump());
        CHECK_THROWS_AS(read_volume(stem), FormatError);
    }
    SUBCASE("big endian") {
        auto m = meta;
        m["endianness"] = "big";
        write_file_atomic(stem + ".vol.json", m.dump());
        CHECK_THROWS_AS(read_volume(stem), FormatError);
    }
    SUBCASE("malformed sidecar") {
        write_file_atomic(stem + ".vol.json", "{not json");
        CHECK_THROWS_AS(read_volume(stem), FormatError);
    }
    SUBCASE("missing payload") {
        fs::remove(stem + ".vol.bin");
        CHECK_THROWS_AS(read_volume(stem), FormatError);
    }
    SUBCASE("writer rejects bad input") {
        Volume bad;
        bad.data = Tensor<float>({2, 2, 2});
        CHECK_THROWS_AS(write_volume(stem, bad), DimensionError);
        bad.data = Tensor<float>({1, 1, 1, 1}, std::vector<float>{INFINITY});
        CHECK_THROWS_AS(write_volume(stem, bad), NumericError);
    }
}

TEST_CASE("Dice equals a brute-force count") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        const double p = 0.05 + 0.9 * static_cast<double>(trial) / 100.0;
        const auto a = random_mask({8, 8, 8}, rng, p);
        const auto b = random_mask({8, 8, 8}, rng, 0.5);
        std::size_t inter = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < 512; ++i) {
            inter += a.data()[i] == 1.0f && b.data()[i] == 1.0f;
            na += a.data()[i] == 1.0f;
            nb += b.data()[i] == 1.0f;
        }
        const double expect = 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
        CHECK(dice(a, b) == doctest::Approx(expect).epsilon(1e-15));
        CHECK(dice(a, b) == dice(b, a));
        CHECK(dice(a, a) == 1.0);
    }
    const Tensor<float> empty({4, 4, 4});
    CHECK(dice(empty, empty) == 1.0);
    CHECK(dice(empty, Tensor<float>({4, 4, 4}, 1.0f)) == 0.0);
    CHECK_THROWS_AS(dice(empty, Tensor<float>({4, 4, 5})), DimensionError);
    CHECK_THROWS_AS(dice(empty, Tensor<float>({4, 4, 4}, 0.5f)), std::invalid_argument);
}

TEST_CASE("threshold is inclusive at t") {
    const Tensor<float> p({4}, std::vector<float>{0.2f, 0.5f, 0.7f, 0.49f});
    const auto m = threshold(p, 0.5);
    CHECK(m.data()[0] == 0.0f);
    CHECK(m.data()[1] == 1.0f);
    CHECK(m.data()[2] == 1.0f);
    CHECK(m.data()[3] == 0.0f);
    CHECK_THROWS_AS(threshold(p, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(threshold(p, 1.0), std::invalid_argument);
}

TEST_CASE("folds partition the ids") {
    std::vector<std::string> ids;
    for (int i = 0; i < 23; ++i) ids.push_back("case" + std::to_string(i));
    const auto split = make_folds(ids, 5, 3);
    const auto folds = split.folds();
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> seen;
    for (const auto& f : folds) {
        CHECK(f.size() >= 4);
        CHECK(f.size() <= 5);
        for (auto i : f) CHECK(seen.insert(i).second);
    }
    CHECK(seen.size() == ids.size());
    CHECK(make_folds(ids, 5, 3).assignment == split.assignment);
    CHECK(make_folds(ids, 5, 4).assignment != split.assignment);
    CHECK_THROWS_AS(make_folds(ids, 0), std::invalid_argument);
    CHECK_THROWS_AS(make_folds(ids, 24), std::invalid_argument);
}

TEST_CASE("phantom contract") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto s = make_phantom(32, seed);
        REQUIRE(s.volume.shape() == Shape{32, 32, 32, 2});
        REQUIRE(s.mask.shape() == Shape{32, 32, 32});
        std::size_t voxels = 0;
        for (float v : s.mask.data()) {
            CHECK((v == 0.0f || v == 1.0f));
            voxels += v == 1.0f;
        }
        CHECK(voxels > 0);
        CAPTURE(seed);
        CHECK(shell_boundary_overlap(s) >= 0.95);
        CHECK(pet_threshold_baseline(s) < 0.9);
        const auto again = make_phantom(32, seed);
        CHECK(std::memcmp(again.volume.data().data(), s.volume.data().data(), s.volume.numel() * sizeof(float)) == 0);
    }
    const auto a = make_phantom(16, 0), b = make_phantom(16, 1);
    CHECK(std::memcmp(a.mask.data().data(), b.mask.data().data(), a.mask.numel() * sizeof(float)) != 0);
    CHECK_THROWS_AS(make_phantom(8, 0), std::invalid_argument);
}
