#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dyspn/core.hpp"

namespace dyspn::io {

// "DYT1" raw tensor container: magic, rank (u32 LE), dims (u32 LE each),
// dtype code (u32 LE; 0 = f32, 1 = f64), then row-major little-endian payload.
struct Tensor {
    std::vector<std::uint32_t> dims;
    Precision dtype = Precision::F64;
    std::vector<double> data;

    std::size_t element_count() const {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }
};

Tensor read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);

// Binary 16-bit PGM depth map with the common fixed-point value convention
// depth_meters = sample / 256.0, sample 0 = invalid. maxval must be 65535.
DepthGrid read_depth_pgm(const std::filesystem::path& path);
void write_depth_pgm(const std::filesystem::path& path, const DepthGrid& grid);

// Raw sample access, used by round-trip checks and converters.
struct PgmImage {
    int height = 0;
    int width = 0;
    std::vector<std::uint16_t> samples;  // row-major
};
PgmImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const PgmImage& image);

// Flat key=value run configuration. Unknown keys are rejected.
struct RunConfig {
    std::string variant = "ring7x7";
    int steps = 6;
    double epsilon = 1e-8;
    std::string precision = "f64";
    int threads = 1;
    std::uint64_t seed = 0;

    // file paths
    std::string depth;
    std::string affinity;
    std::string attention;
    std::string offsets;
    std::string output;

    // schedule / scene parameters
    std::string schedule = "far-decay";
    std::string scene = "step-edge";
    double rate = 0.05;
    double sigma = 0.06;
    int height = 64;
    int width = 64;
    double near_m = 2.0;
    double far_m = 5.0;

    PropagationConfig propagation_config() const;
};

RunConfig parse_run_config(std::istream& in);
RunConfig read_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& config);
void write_run_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace dyspn::io
