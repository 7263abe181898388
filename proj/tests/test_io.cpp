#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fastmusic/io.hpp"
#include "fastmusic/rng.hpp"
#include "fastmusic/spectrum.hpp"

using namespace fastmusic;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "fastmusic_io_test";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("scene file round trip") {
    TargetScene scene;
    scene.targets.push_back({0.6108652381980153, 2.5e-8, Complex(1.0, -0.25)});
    scene.targets.push_back({1.2217304763960306, 7.5e-8, Complex(-0.5, 0.75)});
    const auto path = (temp_dir() / "scene.txt").string();
    write_scene(path, scene);
    const TargetScene back = read_scene(path);
    REQUIRE(back.size() == 2);
    for (Index i = 0; i < 2; ++i) {
        CHECK(back.targets[i].angle_rad ==
              doctest::Approx(scene.targets[i].angle_rad).epsilon(1e-12));
        CHECK(back.targets[i].delay_s == doctest::Approx(scene.targets[i].delay_s));
        CHECK(std::abs(back.targets[i].gain - scene.targets[i].gain) < 1e-12);
    }
}

TEST_CASE("scene file rejects malformed lines") {
    const auto path = (temp_dir() / "bad_scene.txt").string();
    std::ofstream(path) << "target 30.0 1e-8 1.0\n";  // missing a field
    CHECK_THROWS_AS((void)read_scene(path), std::runtime_error);
    std::ofstream(path) << "source 30.0 1e-8 1.0 0.0\n";
    CHECK_THROWS_AS((void)read_scene(path), std::runtime_error);
}

TEST_CASE("binary matrix round trip at float32 precision") {
    Rng rng(5);
    CxMat a(7, 3);
    for (Index i = 0; i < 7; ++i) {
        for (Index j = 0; j < 3; ++j) a(i, j) = Complex(rng.normal(), rng.normal());
    }
    const auto path = (temp_dir() / "mat.bin").string();
    write_matrix_binary(path, a);
    const CxMat back = read_matrix_binary(path);
    REQUIRE(back.rows() == 7);
    REQUIRE(back.cols() == 3);
    CHECK((back - a).norm() < 1e-6 * a.norm());
    // Header layout: magic + version + dims + rows*cols complex64.
    CHECK(fs::file_size(path) == 4 + 4 + 4 + 4 + 7 * 3 * 8);
}

TEST_CASE("binary matrix reader rejects a bad magic") {
    const auto path = (temp_dir() / "junk.bin").string();
    std::ofstream(path, std::ios::binary) << "NOPE furthermore";
    CHECK_THROWS_AS((void)read_matrix_binary(path), std::runtime_error);
}

TEST_CASE("matrix and spectrum CSV writers") {
    const auto mpath = (temp_dir() / "mat.csv").string();
    write_matrix_csv(mpath, CxMat::Identity(2, 2));
    std::ifstream in(mpath);
    std::string header;
    std::getline(in, header);
    CHECK(header.find("rows=2") != std::string::npos);
    std::string row;
    std::getline(in, row);
    CHECK(row == "1,0,0,0");

    PseudoSpectrum p{AngleGrid(3), RealVec(3), Method::Exact, false};
    p.values << 0.5, 1.5, 0.25;
    const auto spath = (temp_dir() / "spec.csv").string();
    write_spectrum_csv(spath, p);
    std::ifstream sin(spath);
    std::getline(sin, header);
    CHECK(header == "theta_deg,value");
    int lines = 0;
    while (std::getline(sin, row)) ++lines;
    CHECK(lines == 3);
}
