#include "pfnn2/network.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace pfnn2 {

namespace {

constexpr std::uint32_t kMagic = 0x43324650u;  // "PF2C"
constexpr std::uint16_t kVersion = 1;

void put_u16(std::FILE* f, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8)};
    std::fwrite(b, 1, 2, f);
}
void put_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    std::fwrite(b, 1, 4, f);
}
void put_u64(std::FILE* f, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    std::fwrite(b, 1, 8, f);
}
void put_f64(std::FILE* f, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    put_u64(f, u);
}

std::uint16_t get_u16(std::FILE* f) {
    unsigned char b[2];
    if (std::fread(b, 1, 2, f) != 2) throw std::runtime_error("checkpoint: truncated file");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}
std::uint32_t get_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw std::runtime_error("checkpoint: truncated file");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
std::uint64_t get_u64(std::FILE* f) {
    unsigned char b[8];
    if (std::fread(b, 1, 8, f) != 8) throw std::runtime_error("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}
double get_f64(std::FILE* f) {
    const std::uint64_t u = get_u64(f);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

struct FileCloser {
    void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};

}  // namespace

void write_checkpoint(const std::string& path, const Architecture& arch, Precision prec,
                      std::span<const float> params_f32, std::span<const double> params_f64) {
    std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    const std::size_t n =
        prec == Precision::F32 ? params_f32.size() : params_f64.size();
    if (n != arch.param_count())
        throw std::invalid_argument("checkpoint: parameter count does not match architecture");

    put_u32(f.get(), kMagic);
    put_u16(f.get(), kVersion);
    unsigned char real_size = prec == Precision::F32 ? 4 : 8;
    unsigned char flags = arch.has_time ? 1 : 0;
    std::fwrite(&real_size, 1, 1, f.get());
    std::fwrite(&flags, 1, 1, f.get());
    put_u32(f.get(), static_cast<std::uint32_t>(arch.spatial_dim));
    put_u32(f.get(), static_cast<std::uint32_t>(arch.output_dim));
    put_u32(f.get(), static_cast<std::uint32_t>(arch.n_blocks));
    put_u32(f.get(), static_cast<std::uint32_t>(arch.width));
    put_u32(f.get(), static_cast<std::uint32_t>(arch.periods.size()));
    for (double P : arch.periods) put_f64(f.get(), P);
    put_u64(f.get(), n);
    if (prec == Precision::F32) {
        for (float v : params_f32) {
            std::uint32_t u;
            std::memcpy(&u, &v, 4);
            put_u32(f.get(), u);
        }
    } else {
        for (double v : params_f64) put_f64(f.get(), v);
    }
}

Checkpoint read_checkpoint(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
    if (get_u32(f.get()) != kMagic) throw std::runtime_error("checkpoint: bad magic");
    if (get_u16(f.get()) != kVersion) throw std::runtime_error("checkpoint: bad version");
    unsigned char real_size = 0, flags = 0;
    if (std::fread(&real_size, 1, 1, f.get()) != 1 || std::fread(&flags, 1, 1, f.get()) != 1)
        throw std::runtime_error("checkpoint: truncated file");

    Checkpoint ck;
    ck.prec = real_size == 4 ? Precision::F32 : Precision::F64;
    ck.arch.has_time = (flags & 1) != 0;
    ck.arch.spatial_dim = static_cast<int>(get_u32(f.get()));
    ck.arch.output_dim = static_cast<int>(get_u32(f.get()));
    ck.arch.n_blocks = static_cast<int>(get_u32(f.get()));
    ck.arch.width = static_cast<int>(get_u32(f.get()));
    const std::uint32_t np = get_u32(f.get());
    ck.arch.periods.resize(np);
    for (auto& P : ck.arch.periods) P = get_f64(f.get());
    const std::uint64_t n = get_u64(f.get());
    if (n != ck.arch.param_count())
        throw std::runtime_error("checkpoint: parameter count does not match header");
    ck.params.resize(n);
    if (real_size == 4) {
        for (auto& v : ck.params) {
            const std::uint32_t u = get_u32(f.get());
            float fv;
            std::memcpy(&fv, &u, 4);
            v = static_cast<double>(fv);
        }
    } else {
        for (auto& v : ck.params) v = get_f64(f.get());
    }
    return ck;
}

}  // namespace pfnn2
