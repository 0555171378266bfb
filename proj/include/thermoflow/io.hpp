#pragma once

// Binary point clouds: little-endian "TFPC" files with a 16-byte header
// (magic, version u32, dim u32, count u32) followed by count * dim doubles.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "thermoflow/core.hpp"

namespace thermoflow {

static_assert(std::endian::native == std::endian::little, "TFPC I/O assumes a little-endian host");

inline constexpr std::uint32_t kTfpcVersion = 1;

struct PointCloud {
    std::uint32_t dim = 0;
    std::vector<double> values;  ///< row-major, count * dim

    std::size_t count() const { return dim == 0 ? 0 : values.size() / dim; }
    const double* row(std::size_t i) const { return values.data() + i * dim; }
};

inline void write_tfpc(const std::string& path, const PointCloud& cloud) {
    if (cloud.dim == 0 || cloud.values.size() % cloud.dim != 0)
        throw Error(ErrorCode::InvalidArgument, "point cloud shape is inconsistent");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    const auto count = static_cast<std::uint32_t>(cloud.count());
    out.write("TFPC", 4);
    out.write(reinterpret_cast<const char*>(&kTfpcVersion), 4);
    out.write(reinterpret_cast<const char*>(&cloud.dim), 4);
    out.write(reinterpret_cast<const char*>(&count), 4);
    out.write(reinterpret_cast<const char*>(cloud.values.data()),
              static_cast<std::streamsize>(cloud.values.size() * sizeof(double)));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

inline PointCloud read_tfpc(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    char magic[4];
    std::uint32_t version = 0, count = 0;
    PointCloud cloud;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&cloud.dim), 4);
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in || std::memcmp(magic, "TFPC", 4) != 0) throw Error(ErrorCode::Io, path + " is not a TFPC file");
    if (version != kTfpcVersion) throw Error(ErrorCode::Io, path + ": unsupported TFPC version");
    cloud.values.resize(static_cast<std::size_t>(count) * cloud.dim);
    in.read(reinterpret_cast<char*>(cloud.values.data()), static_cast<std::streamsize>(cloud.values.size() * sizeof(double)));
    if (!in) throw Error(ErrorCode::Io, path + ": truncated TFPC payload");
    return cloud;
}

template <std::size_t D>
PointCloud to_cloud(const std::vector<std::array<double, D>>& pts) {
    PointCloud c;
    c.dim = static_cast<std::uint32_t>(D);
    c.values.reserve(pts.size() * D);
    for (const auto& p : pts) c.values.insert(c.values.end(), p.begin(), p.end());
    return c;
}

template <std::size_t D>
std::vector<std::array<double, D>> from_cloud(const PointCloud& c) {
    if (c.dim != D) throw Error(ErrorCode::Io, "TFPC dimension mismatch");
    std::vector<std::array<double, D>> out(c.count());
    for (std::size_t i = 0; i < out.size(); ++i) std::memcpy(out[i].data(), c.row(i), sizeof(double) * D);
    return out;
}

}  // namespace thermoflow
