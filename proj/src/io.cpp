#include "fastmusic/io.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fastmusic {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr char kMatrixMagic[4] = {'F', 'M', 'C', 'X'};

std::ofstream open_out(const std::string& path, std::ios_base::openmode mode = std::ios::out) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path, std::ios_base::openmode mode = std::ios::in) {
    std::ifstream in(path, mode);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

}  // namespace

void write_scene(const std::string& path, const TargetScene& scene) {
    std::ofstream out = open_out(path);
    out << "# target scene: one 'target <theta_deg> <tau_s> <alpha_re> <alpha_im>' per line\n";
    out << std::setprecision(17);
    for (const Target& t : scene.targets) {
        out << "target " << t.angle_rad * 180.0 / kPi << ' ' << t.delay_s << ' '
            << t.gain.real() << ' ' << t.gain.imag() << '\n';
    }
}

TargetScene read_scene(const std::string& path) {
    std::ifstream in = open_in(path);
    TargetScene scene;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word != "target") {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 'target', got '" + word + "'");
        }
        double theta_deg = 0, tau = 0, re = 0, im = 0;
        if (!(ls >> theta_deg >> tau >> re >> im)) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected 4 numeric fields");
        }
        scene.targets.push_back({theta_deg * kPi / 180.0, tau, Complex(re, im)});
    }
    scene.validate(0.0);
    return scene;
}

void write_matrix_binary(const std::string& path, const CxMat& a) {
    ensure_finite(a, "write_matrix_binary");
    std::ofstream out = open_out(path, std::ios::out | std::ios::binary);
    out.write(kMatrixMagic, 4);
    const std::uint32_t version = 1;
    const std::uint32_t rows = static_cast<std::uint32_t>(a.rows());
    const std::uint32_t cols = static_cast<std::uint32_t>(a.cols());
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&rows), 4);
    out.write(reinterpret_cast<const char*>(&cols), 4);
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            const float re = static_cast<float>(a(i, j).real());
            const float im = static_cast<float>(a(i, j).imag());
            out.write(reinterpret_cast<const char*>(&re), 4);
            out.write(reinterpret_cast<const char*>(&im), 4);
        }
    }
}

CxMat read_matrix_binary(const std::string& path) {
    std::ifstream in = open_in(path, std::ios::in | std::ios::binary);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != std::string(kMatrixMagic, 4)) {
        throw std::runtime_error(path + ": bad magic");
    }
    std::uint32_t version = 0, rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&rows), 4);
    in.read(reinterpret_cast<char*>(&cols), 4);
    if (!in || version != 1) throw std::runtime_error(path + ": unsupported version");
    CxMat a(rows, cols);
    for (std::uint32_t i = 0; i < rows; ++i) {
        for (std::uint32_t j = 0; j < cols; ++j) {
            float re = 0, im = 0;
            in.read(reinterpret_cast<char*>(&re), 4);
            in.read(reinterpret_cast<char*>(&im), 4);
            a(i, j) = Complex(re, im);
        }
    }
    if (!in) throw std::runtime_error(path + ": truncated payload");
    return a;
}

void write_matrix_csv(const std::string& path, const CxMat& a) {
    std::ofstream out = open_out(path);
    out << "# rows=" << a.rows() << " cols=" << a.cols() << " re,im interleaved\n";
    out << std::setprecision(17);
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            if (j > 0) out << ',';
            out << a(i, j).real() << ',' << a(i, j).imag();
        }
        out << '\n';
    }
}

void write_spectrum_csv(const std::string& path, const PseudoSpectrum& spectrum) {
    std::ofstream out = open_out(path);
    out << "theta_deg,value\n";
    out << std::setprecision(17);
    for (Index l = 0; l < spectrum.grid.size(); ++l) {
        out << spectrum.grid.theta(l) * 180.0 / kPi << ',' << spectrum.values(l) << '\n';
    }
}

}  // namespace fastmusic
