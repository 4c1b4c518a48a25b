#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dyspn/io.hpp"

using namespace dyspn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dyspn-test-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("tensor round trip") {
    TempDir dir;
    io::Tensor t;
    t.dims = {3, 4, 5};
    t.dtype = Precision::F64;
    std::mt19937_64 rng(1);
    t.data.resize(60);
    for (double& v : t.data) v = (rng() >> 11) * 0x1.0p-53 * 20.0 - 10.0;
    const fs::path p = dir.path / "t.dyt";
    io::write_tensor(p, t);
    const io::Tensor back = io::read_tensor(p);
    CHECK(back.dims == t.dims);
    CHECK(back.dtype == t.dtype);
    CHECK(back.data == t.data);  // bit exact for f64
}

TEST_CASE("tensor f32 round trip preserves f32 values") {
    TempDir dir;
    io::Tensor t;
    t.dims = {8};
    t.dtype = Precision::F32;
    t.data = {0.5, -1.25, 3.0, 1e10, -1e-10, 0.0, 7.5, 2.0};
    for (double& v : t.data) v = double(float(v));
    const fs::path p = dir.path / "t32.dyt";
    io::write_tensor(p, t);
    const io::Tensor back = io::read_tensor(p);
    CHECK(back.data == t.data);
}

TEST_CASE("tensor error paths") {
    TempDir dir;
    SUBCASE("bad magic") {
        const fs::path p = dir.path / "bad.dyt";
        std::ofstream(p, std::ios::binary) << "NOPE0000";
        CHECK_THROWS_WITH_AS(io::read_tensor(p), doctest::Contains("magic"),
                             std::runtime_error);
    }
    SUBCASE("truncated payload") {
        io::Tensor t;
        t.dims = {4, 4};
        t.data.assign(16, 1.0);
        const fs::path p = dir.path / "trunc.dyt";
        io::write_tensor(p, t);
        fs::resize_file(p, fs::file_size(p) - 9);
        CHECK_THROWS_WITH_AS(io::read_tensor(p), doctest::Contains("truncated"),
                             std::runtime_error);
    }
    SUBCASE("trailing bytes") {
        io::Tensor t;
        t.dims = {2};
        t.data = {1.0, 2.0};
        const fs::path p = dir.path / "extra.dyt";
        io::write_tensor(p, t);
        std::ofstream(p, std::ios::binary | std::ios::app) << "x";
        CHECK_THROWS_AS(io::read_tensor(p), std::runtime_error);
    }
}

TEST_CASE("pgm depth round trip and convention") {
    TempDir dir;
    DepthGrid grid(2, 3);
    grid.at(0, 0) = 1.0;  // sample 256
    grid.at(0, 1) = 0.0;  // invalid
    grid.at(0, 2) = 255.99609375;  // sample 65535
    grid.at(1, 0) = 0.00390625;    // sample 1
    grid.at(1, 1) = 12.5;
    grid.at(1, 2) = 100.0;
    const fs::path p = dir.path / "d.pgm";
    io::write_depth_pgm(p, grid);
    const io::PgmImage img = io::read_pgm(p);
    CHECK(img.samples[0] == 256);
    CHECK(img.samples[1] == 0);
    CHECK(img.samples[2] == 65535);
    CHECK(img.samples[3] == 1);
    const DepthGrid back = io::read_depth_pgm(p);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(back.values()[i] == grid.values()[i]);

    // Byte-exact encode(decode(f)) for a canonical file.
    const fs::path p2 = dir.path / "d2.pgm";
    io::write_depth_pgm(p2, back);
    CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("pgm error paths") {
    TempDir dir;
    SUBCASE("depth overflow on write") {
        DepthGrid grid(1, 1);
        grid.at(0, 0) = 300.0;  // > 65535/256
        CHECK_THROWS_WITH_AS(io::write_depth_pgm(dir.path / "o.pgm", grid),
                             doctest::Contains("exceeds"), std::runtime_error);
    }
    SUBCASE("wrong maxval") {
        const fs::path p = dir.path / "8bit.pgm";
        std::ofstream(p, std::ios::binary) << "P5\n2 1\n255\nab";
        CHECK_THROWS_WITH_AS(io::read_pgm(p), doctest::Contains("maxval"),
                             std::runtime_error);
    }
    SUBCASE("truncated samples") {
        const fs::path p = dir.path / "short.pgm";
        std::ofstream(p, std::ios::binary) << "P5\n2 2\n65535\nabc";
        CHECK_THROWS_WITH_AS(io::read_pgm(p), doctest::Contains("truncated"),
                             std::runtime_error);
    }
    SUBCASE("comments in header accepted") {
        const fs::path p = dir.path / "comment.pgm";
        std::ofstream out(p, std::ios::binary);
        out << "P5\n# a comment\n1 1\n65535\n";
        out.put('\x01');
        out.put('\0');
        out.close();
        const io::PgmImage img = io::read_pgm(p);
        CHECK(img.samples[0] == 256);
    }
}

TEST_CASE("run config parse and round trip") {
    io::RunConfig config;
    config.variant = "dilated";
    config.steps = 12;
    config.epsilon = 1e-6;
    config.seed = 42;
    config.depth = "h0.pgm";
    config.output = "out.pgm";
    std::istringstream in(io::serialize_run_config(config));
    const io::RunConfig back = io::parse_run_config(in);
    CHECK(back.variant == "dilated");
    CHECK(back.steps == 12);
    CHECK(back.epsilon == 1e-6);
    CHECK(back.seed == 42);
    CHECK(back.depth == "h0.pgm");
    CHECK(back.output == "out.pgm");
}

TEST_CASE("run config rejects unknown keys and bad values") {
    {
        std::istringstream in("variant=ring7x7\nbogus=1\n");
        CHECK_THROWS_WITH_AS(io::parse_run_config(in), doctest::Contains("unknown key"),
                             std::invalid_argument);
    }
    {
        std::istringstream in("steps=abc\n");
        CHECK_THROWS_AS(io::parse_run_config(in), std::invalid_argument);
    }
    {
        std::istringstream in("no equals sign here\n");
        CHECK_THROWS_AS(io::parse_run_config(in), std::invalid_argument);
    }
}
