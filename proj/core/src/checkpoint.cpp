#include "semdyn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace semdyn {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'W', 'M'};
constexpr std::uint32_t kVersion = 1;

// The build targets little-endian x86-64 only; serialize native byte order.
template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw std::runtime_error("truncated checkpoint");
    return v;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 4);
    write_pod(os, kVersion);
    write_pod(os, static_cast<std::uint8_t>(model.config().kind));
    write_pod(os, static_cast<std::uint32_t>(model.config().slots));
    write_pod(os, static_cast<std::uint32_t>(model.config().semantic_width));
    write_pod(os, static_cast<std::uint32_t>(model.params().size()));
    for (const auto& p : model.params()) {
        write_pod(os, static_cast<std::uint32_t>(p.name.size()));
        os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        write_pod(os, static_cast<std::uint64_t>(p.value.rows));
        write_pod(os, static_cast<std::uint64_t>(p.value.cols));
        os.write(reinterpret_cast<const char*>(p.value.v.data()),
                 static_cast<std::streamsize>(p.value.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));

    ModelConfig cfg;
    cfg.kind = static_cast<VariantKind>(read_pod<std::uint8_t>(is));
    cfg.slots = static_cast<int>(read_pod<std::uint32_t>(is));
    cfg.semantic_width = static_cast<int>(read_pod<std::uint32_t>(is));
    const auto n_params = read_pod<std::uint32_t>(is);

    Model model(cfg);
    if (model.params().size() != n_params)
        throw std::runtime_error("checkpoint parameter count mismatch");
    for (auto& p : model.params()) {
        const auto name_len = read_pod<std::uint32_t>(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        const auto rows = read_pod<std::uint64_t>(is);
        const auto cols = read_pod<std::uint64_t>(is);
        if (!is || name != p.name || rows != p.value.rows || cols != p.value.cols)
            throw std::runtime_error("checkpoint layout mismatch at " + p.name);
        is.read(reinterpret_cast<char*>(p.value.v.data()),
                static_cast<std::streamsize>(p.value.size() * sizeof(double)));
        if (!is) throw std::runtime_error("truncated checkpoint at " + p.name);
    }
    return model;
}

}  // namespace semdyn
