#include "dyspn/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace dyspn::io {

namespace {

constexpr char kMagic[4] = {'D', 'Y', 'T', '1'};
constexpr std::uint32_t kMaxRank = 8;
constexpr std::size_t kMaxElements = std::size_t(1) << 31;

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t read_u32(std::istream& in, const std::string& what) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw std::runtime_error("tensor read: truncated " + what);
    return v;
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& msg) {
    throw std::runtime_error(path.string() + ": " + msg);
}

}  // namespace

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) fail(path, "bad magic (expected DYT1)");
    Tensor tensor;
    const std::uint32_t rank = read_u32(in, "rank");
    if (rank == 0 || rank > kMaxRank)
        fail(path, "rank " + std::to_string(rank) + " outside [1," + std::to_string(kMaxRank) + "]");
    tensor.dims.resize(rank);
    std::size_t count = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
        tensor.dims[r] = read_u32(in, "dims");
        if (tensor.dims[r] == 0) fail(path, "zero dimension");
        count *= tensor.dims[r];
        if (count > kMaxElements) fail(path, "tensor too large");
    }
    const std::uint32_t dtype = read_u32(in, "dtype");
    if (dtype > 1) fail(path, "unknown dtype code " + std::to_string(dtype));
    tensor.dtype = dtype == 0 ? Precision::F32 : Precision::F64;
    tensor.data.resize(count);
    if (tensor.dtype == Precision::F32) {
        std::vector<float> buf(count);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * 4));
        if (!in) fail(path, "truncated payload");
        for (std::size_t idx = 0; idx < count; ++idx) tensor.data[idx] = buf[idx];
    } else {
        in.read(reinterpret_cast<char*>(tensor.data.data()),
                static_cast<std::streamsize>(count * 8));
        if (!in) fail(path, "truncated payload");
    }
    in.peek();
    if (!in.eof()) fail(path, "trailing bytes after payload");
    return tensor;
}

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
    if (tensor.dims.empty() || tensor.dims.size() > kMaxRank)
        throw std::invalid_argument("write_tensor: rank outside [1," +
                                    std::to_string(kMaxRank) + "]");
    if (tensor.element_count() != tensor.data.size())
        throw std::invalid_argument("write_tensor: data length does not match dims");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out.write(kMagic, 4);
    write_u32(out, static_cast<std::uint32_t>(tensor.dims.size()));
    for (auto d : tensor.dims) write_u32(out, d);
    write_u32(out, tensor.dtype == Precision::F32 ? 0u : 1u);
    if (tensor.dtype == Precision::F32) {
        std::vector<float> buf(tensor.data.size());
        for (std::size_t idx = 0; idx < buf.size(); ++idx)
            buf[idx] = static_cast<float>(tensor.data[idx]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * 4));
    } else {
        out.write(reinterpret_cast<const char*>(tensor.data.data()),
                  static_cast<std::streamsize>(tensor.data.size() * 8));
    }
    if (!out) fail(path, "write failed");
}

namespace {

int read_pgm_int(std::istream& in, const std::filesystem::path& path, const char* what) {
    // Skip whitespace and '#' comments per the PNM convention.
    for (;;) {
        const int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = 0;
    if (!(in >> value)) fail(path, std::string("malformed PGM header (") + what + ")");
    return value;
}

}  // namespace

PgmImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    char p = 0, five = 0;
    in.get(p);
    in.get(five);
    if (!in || p != 'P' || five != '5') fail(path, "not a binary PGM (P5) file");
    const int width = read_pgm_int(in, path, "width");
    const int height = read_pgm_int(in, path, "height");
    const int maxval = read_pgm_int(in, path, "maxval");
    if (width < 1 || height < 1) fail(path, "degenerate PGM dims");
    if (maxval != 65535)
        fail(path, "maxval " + std::to_string(maxval) + " != 65535 (16-bit depth required)");
    in.get();  // single whitespace byte after maxval
    PgmImage image;
    image.height = height;
    image.width = width;
    const std::size_t count = static_cast<std::size_t>(height) * width;
    std::vector<std::uint8_t> raw(count * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!in) fail(path, "truncated PGM payload");
    in.peek();
    if (!in.eof()) fail(path, "trailing bytes after PGM payload");
    image.samples.resize(count);
    for (std::size_t idx = 0; idx < count; ++idx)
        image.samples[idx] =
            static_cast<std::uint16_t>((raw[2 * idx] << 8) | raw[2 * idx + 1]);  // big-endian
    return image;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& image) {
    if (image.height < 1 || image.width < 1)
        throw std::invalid_argument("write_pgm: degenerate dims");
    if (image.samples.size() != static_cast<std::size_t>(image.height) * image.width)
        throw std::invalid_argument("write_pgm: sample count does not match dims");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out << "P5\n" << image.width << " " << image.height << "\n65535\n";
    std::vector<std::uint8_t> raw(image.samples.size() * 2);
    for (std::size_t idx = 0; idx < image.samples.size(); ++idx) {
        raw[2 * idx] = static_cast<std::uint8_t>(image.samples[idx] >> 8);
        raw[2 * idx + 1] = static_cast<std::uint8_t>(image.samples[idx] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) fail(path, "write failed");
}

DepthGrid read_depth_pgm(const std::filesystem::path& path) {
    const PgmImage image = read_pgm(path);
    std::vector<double> values(image.samples.size());
    for (std::size_t idx = 0; idx < values.size(); ++idx)
        values[idx] = image.samples[idx] / 256.0;
    return DepthGrid::from_depth_data(image.height, image.width, std::move(values));
}

void write_depth_pgm(const std::filesystem::path& path, const DepthGrid& grid) {
    PgmImage image;
    image.height = grid.height();
    image.width = grid.width();
    image.samples.resize(grid.size());
    auto values = grid.values();
    for (std::size_t idx = 0; idx < values.size(); ++idx) {
        const double v = values[idx];
        if (!(v >= 0.0)) fail(path, "negative or non-finite depth cannot be encoded");
        const long long sample = std::llround(v * 256.0);
        if (sample > 65535)
            fail(path, "depth " + std::to_string(v) + " m exceeds encodable maximum " +
                           std::to_string(65535.0 / 256.0) + " m");
        image.samples[idx] = static_cast<std::uint16_t>(sample);
    }
    write_pgm(path, image);
}

PropagationConfig RunConfig::propagation_config() const {
    PropagationConfig config;
    config.steps = steps;
    config.epsilon = epsilon;
    config.threads = threads;
    if (precision == "f32")
        config.precision = Precision::F32;
    else if (precision == "f64")
        config.precision = Precision::F64;
    else
        throw std::invalid_argument("RunConfig: precision '" + precision +
                                    "' (expected f32 or f64)");
    config.validate();
    return config;
}

RunConfig parse_run_config(std::istream& in) {
    RunConfig config;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value, got '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "variant") config.variant = value;
            else if (key == "steps") config.steps = std::stoi(value);
            else if (key == "epsilon") config.epsilon = std::stod(value);
            else if (key == "precision") config.precision = value;
            else if (key == "threads") config.threads = std::stoi(value);
            else if (key == "seed") config.seed = std::stoull(value);
            else if (key == "depth") config.depth = value;
            else if (key == "affinity") config.affinity = value;
            else if (key == "attention") config.attention = value;
            else if (key == "offsets") config.offsets = value;
            else if (key == "output") config.output = value;
            else if (key == "schedule") config.schedule = value;
            else if (key == "scene") config.scene = value;
            else if (key == "rate") config.rate = std::stod(value);
            else if (key == "sigma") config.sigma = std::stod(value);
            else if (key == "height") config.height = std::stoi(value);
            else if (key == "width") config.width = std::stoi(value);
            else if (key == "near") config.near_m = std::stod(value);
            else if (key == "far") config.far_m = std::stod(value);
            else
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": bad value '" + value + "' for key '" + key + "'");
        }
    }
    return config;
}

RunConfig read_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    return parse_run_config(in);
}

std::string serialize_run_config(const RunConfig& config) {
    std::ostringstream os;
    os.precision(17);
    os << "variant=" << config.variant << "\n"
       << "steps=" << config.steps << "\n"
       << "epsilon=" << config.epsilon << "\n"
       << "precision=" << config.precision << "\n"
       << "threads=" << config.threads << "\n"
       << "seed=" << config.seed << "\n";
    if (!config.depth.empty()) os << "depth=" << config.depth << "\n";
    if (!config.affinity.empty()) os << "affinity=" << config.affinity << "\n";
    if (!config.attention.empty()) os << "attention=" << config.attention << "\n";
    if (!config.offsets.empty()) os << "offsets=" << config.offsets << "\n";
    if (!config.output.empty()) os << "output=" << config.output << "\n";
    os << "schedule=" << config.schedule << "\n"
       << "scene=" << config.scene << "\n"
       << "rate=" << config.rate << "\n"
       << "sigma=" << config.sigma << "\n"
       << "height=" << config.height << "\n"
       << "width=" << config.width << "\n"
       << "near=" << config.near_m << "\n"
       << "far=" << config.far_m << "\n";
    return os.str();
}

void write_run_config(const std::filesystem::path& path, const RunConfig& config) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out << serialize_run_config(config);
    if (!out) fail(path, "write failed");
}

}  // namespace dyspn::io
