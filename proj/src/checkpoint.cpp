#include <cstring>
#include <fstream>

#include "cadseq/checkpoint.hpp"
#include "cadseq/error.hpp"

namespace cadseq {

namespace {
constexpr char kMagic[4] = {'C', 'S', 'Q', 'W'};
constexpr uint32_t kVersion = 1;
}  // namespace

void write_blobs(const std::string& path, const std::vector<NamedBlob>& blobs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CadError(ErrorCode::IoError, "cannot open " + path);
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), 4);
    const uint32_t count = static_cast<uint32_t>(blobs.size());
    out.write(reinterpret_cast<const char*>(&count), 4);
    for (const NamedBlob& b : blobs) {
        const uint32_t nlen = static_cast<uint32_t>(b.name.size());
        const uint32_t rows = static_cast<uint32_t>(b.value.rows);
        const uint32_t cols = static_cast<uint32_t>(b.value.cols);
        out.write(reinterpret_cast<const char*>(&nlen), 4);
        out.write(b.name.data(), nlen);
        out.write(reinterpret_cast<const char*>(&rows), 4);
        out.write(reinterpret_cast<const char*>(&cols), 4);
        out.write(reinterpret_cast<const char*>(b.value.d.data()),
                  static_cast<std::streamsize>(b.value.size() * sizeof(double)));
    }
    if (!out) throw CadError(ErrorCode::IoError, "write failed: " + path);
}

std::vector<NamedBlob> read_blobs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CadError(ErrorCode::IoError, "cannot open " + path);
    char magic[4];
    uint32_t version = 0, count = 0;
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&count), 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw CadError(ErrorCode::IoError, "not a checkpoint file: " + path);
    if (version != kVersion) throw CadError(ErrorCode::IoError, "unsupported checkpoint version");
    std::vector<NamedBlob> blobs;
    blobs.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        uint32_t nlen = 0, rows = 0, cols = 0;
        in.read(reinterpret_cast<char*>(&nlen), 4);
        std::string name(nlen, '\0');
        in.read(name.data(), nlen);
        in.read(reinterpret_cast<char*>(&rows), 4);
        in.read(reinterpret_cast<char*>(&cols), 4);
        Mat m(rows, cols);
        in.read(reinterpret_cast<char*>(m.d.data()),
                static_cast<std::streamsize>(m.size() * sizeof(double)));
        if (!in) throw CadError(ErrorCode::IoError, "truncated checkpoint: " + path);
        blobs.push_back({std::move(name), std::move(m)});
    }
    return blobs;
}

const Mat* find_blob(const std::vector<NamedBlob>& blobs, const std::string& name) {
    for (const NamedBlob& b : blobs) {
        if (b.name == name) return &b.value;
    }
    return nullptr;
}

}  // namespace cadseq
