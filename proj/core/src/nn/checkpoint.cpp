#include "collenc/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "collenc/image_io.hpp"

namespace collenc::nn {

namespace {

constexpr char kMagic[4] = {'C', 'V', 'A', 'E'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kMaxRank = 8;

template <class T>
void put(std::string& out, T x) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xFF));
}

void put_string(std::string& out, const std::string& s) {
    if (s.size() > std::numeric_limits<std::uint32_t>::max()) throw IoError("checkpoint: string too long");
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out += s;
}

class Cursor {
public:
    explicit Cursor(const std::string& bytes) : bytes_(bytes) {}

    template <class T>
    T get() {
        need(sizeof(T));
        T x = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            x |= static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return x;
    }
    std::string get_string(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    [[nodiscard]] bool at_end() const { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw IoError("checkpoint: truncated");
    }
    const std::string& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const VaeModel& model) {
    std::string out(kMagic, 4);
    put<std::uint32_t>(out, kVersion);
    put_string(out, model.config().to_json());
    put<std::uint32_t>(out, static_cast<std::uint32_t>(model.parameters().size()));
    for (const auto& [name, value] : model.parameters()) {
        put_string(out, name);
        put<std::uint32_t>(out, static_cast<std::uint32_t>(value.rank()));
        for (std::size_t d : value.shape()) put<std::uint64_t>(out, d);
        for (double v : value.data()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
    }
    return out;
}

VaeModel deserialize_checkpoint(const std::string& bytes) {
    Cursor in(bytes);
    if (in.get_string(4) != std::string(kMagic, 4)) throw IoError("checkpoint: bad magic");
    if (in.get<std::uint32_t>() != kVersion) throw IoError("checkpoint: unsupported version");
    const VaeConfig config = VaeConfig::from_json(in.get_string(in.get<std::uint32_t>()));
    const auto count = in.get<std::uint32_t>();
    const auto layout = parameter_layout(config);
    if (count != layout.size()) throw IoError("checkpoint: tensor count does not match config");
    std::vector<NamedTensor> params;
    params.reserve(count);
    for (std::uint32_t t = 0; t < count; ++t) {
        std::string name = in.get_string(in.get<std::uint32_t>());
        const auto rank = in.get<std::uint32_t>();
        if (rank > kMaxRank) throw IoError("checkpoint: bad rank for " + name);
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = static_cast<std::size_t>(in.get<std::uint64_t>());
        if (shape != layout[t].second) throw IoError("checkpoint: unexpected shape for " + name);
        Tensor value(shape);
        for (double& v : value.data()) v = std::bit_cast<double>(in.get<std::uint64_t>());
        params.push_back({std::move(name), std::move(value)});
    }
    if (!in.at_end()) throw IoError("checkpoint: trailing bytes");
    return VaeModel::from_parameters(config, std::move(params));
}

void save_checkpoint(const VaeModel& model, const std::filesystem::path& path) {
    const std::string bytes = serialize_checkpoint(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

VaeModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

}  // namespace collenc::nn
