#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "collenc/codecs.hpp"
#include "collenc/image_io.hpp"

namespace collenc {

namespace {

constexpr std::uint32_t kSparseVersion = 1;

class LeWriter {
public:
    explicit LeWriter(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
        if (!out_) throw IoError("cannot open " + path.string() + " for writing");
    }
    void bytes(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
    void u32(std::uint32_t x) { raw(x); }
    void u64(std::uint64_t x) { raw(x); }
    void f64(double x) { raw(std::bit_cast<std::uint64_t>(x)); }
    void finish() {
        out_.flush();
        if (!out_) throw IoError("write failed: " + path_.string());
    }

private:
    template <class T>
    void raw(T x) {
        std::array<char, sizeof(T)> b{};
        for (std::size_t i = 0; i < sizeof(T); ++i) b[i] = static_cast<char>((x >> (8 * i)) & 0xFF);
        bytes(b.data(), b.size());
    }
    std::ofstream out_;
    std::filesystem::path path_;
};

class LeReader {
public:
    explicit LeReader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw IoError("cannot open " + path.string());
    }
    void expect_magic(const char (&magic)[5]) {
        char m[4];
        read(m, 4);
        if (std::memcmp(m, magic, 4) != 0) throw IoError(path_.string() + ": bad magic");
    }
    std::uint32_t u32() { return raw<std::uint32_t>(); }
    std::uint64_t u64() { return raw<std::uint64_t>(); }
    double f64() { return std::bit_cast<double>(raw<std::uint64_t>()); }

private:
    void read(char* p, std::size_t n) {
        in_.read(p, static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw IoError(path_.string() + ": truncated");
    }
    template <class T>
    T raw() {
        std::array<unsigned char, sizeof(T)> b{};
        read(reinterpret_cast<char*>(b.data()), b.size());
        T x = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) x |= static_cast<T>(b[i]) << (8 * i);
        return x;
    }
    std::ifstream in_;
    std::filesystem::path path_;
};

void check_version(std::uint32_t v, const std::filesystem::path& path) {
    if (v != kSparseVersion) throw IoError(path.string() + ": unsupported version");
}

}  // namespace

void save_sparse(const std::filesystem::path& path, const SparseSpectrum& code) {
    LeWriter w(path);
    w.bytes("CSFT", 4);
    w.u32(kSparseVersion);
    w.u32(static_cast<std::uint32_t>(code.width));
    w.u32(static_cast<std::uint32_t>(code.height));
    w.u64(code.budget);
    w.u32(static_cast<std::uint32_t>(code.entries.size()));
    for (const auto& [index, value] : code.entries) {
        w.u32(index);
        w.f64(value.real());
        w.f64(value.imag());
    }
    w.finish();
}

void save_sparse(const std::filesystem::path& path, const SparseWavelet& code) {
    LeWriter w(path);
    w.bytes("CSHW", 4);
    w.u32(kSparseVersion);
    w.u32(static_cast<std::uint32_t>(code.width));
    w.u32(static_cast<std::uint32_t>(code.height));
    w.u32(static_cast<std::uint32_t>(code.padded_width));
    w.u32(static_cast<std::uint32_t>(code.padded_height));
    w.u32(static_cast<std::uint32_t>(code.levels));
    w.u32(static_cast<std::uint32_t>(code.entries.size()));
    for (const auto& [index, value] : code.entries) {
        w.u32(index);
        w.f64(value);
    }
    w.finish();
}

SparseSpectrum load_sparse_spectrum(const std::filesystem::path& path) {
    LeReader r(path);
    r.expect_magic("CSFT");
    check_version(r.u32(), path);
    SparseSpectrum code;
    code.width = static_cast<int>(r.u32());
    code.height = static_cast<int>(r.u32());
    code.budget = r.u64();
    const std::uint32_t count = r.u32();
    const auto bins = static_cast<std::size_t>(code.width) * static_cast<std::size_t>(code.height);
    if (count > bins) throw IoError(path.string() + ": entry count exceeds spectrum size");
    code.entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t index = r.u32();
        if (index >= bins) throw IoError(path.string() + ": index out of range");
        const double re = r.f64();
        const double im = r.f64();
        code.entries.emplace_back(index, Complex{re, im});
    }
    return code;
}

SparseWavelet load_sparse_wavelet(const std::filesystem::path& path) {
    LeReader r(path);
    r.expect_magic("CSHW");
    check_version(r.u32(), path);
    SparseWavelet code;
    code.width = static_cast<int>(r.u32());
    code.height = static_cast<int>(r.u32());
    code.padded_width = static_cast<int>(r.u32());
    code.padded_height = static_cast<int>(r.u32());
    code.levels = static_cast<int>(r.u32());
    const std::uint32_t count = r.u32();
    const auto coeffs =
        static_cast<std::size_t>(code.padded_width) * static_cast<std::size_t>(code.padded_height);
    if (count > coeffs) throw IoError(path.string() + ": entry count exceeds plane size");
    code.entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t index = r.u32();
        if (index >= coeffs) throw IoError(path.string() + ": index out of range");
        code.entries.emplace_back(index, r.f64());
    }
    return code;
}

}  // namespace collenc
