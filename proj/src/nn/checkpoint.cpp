#include "warpconv/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace warpconv::nn {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[8] = {'W', 'R', 'P', 'C', 'K', 'P', 'T', '\0'};

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw CheckpointError("cannot open checkpoint for writing: " + path.string());
    }
    template <class T>
    void pod(T v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    void text(const std::string& s) {
        pod<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void tensor(const std::string& name, std::span<const double> values) {
        text(name);
        pod<std::uint64_t>(values.size());
        out_.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
    }
    void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void finish() {
        out_.flush();
        if (!out_) throw CheckpointError("checkpoint write failed");
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
        if (!in_) throw CheckpointError("cannot open checkpoint: " + path.string());
    }
    template <class T>
    T pod() {
        T v{};
        get(&v, sizeof v);
        return v;
    }
    std::string text() {
        const auto n = pod<std::uint32_t>();
        if (n > (1u << 20)) throw CheckpointError("checkpoint string field too long");
        std::string s(n, '\0');
        get(s.data(), n);
        return s;
    }
    void tensor(const std::string& expected, std::span<double> values) {
        const std::string name = text();
        if (name != expected)
            throw CheckpointError("checkpoint tensor '" + name + "' where '" + expected + "' was expected");
        const auto count = pod<std::uint64_t>();
        if (count != values.size())
            throw CheckpointError("checkpoint tensor '" + name + "' has " + std::to_string(count) +
                                  " values, network expects " + std::to_string(values.size()));
        get(values.data(), values.size_bytes());
    }
    void get(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) throw CheckpointError("checkpoint is truncated");
    }

private:
    std::ifstream in_;
};

CheckpointInfo read_header(Reader& r) {
    char magic[8];
    r.get(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof magic) != 0) throw CheckpointError("not a warpconv checkpoint");
    CheckpointInfo info;
    info.version = r.pod<std::uint32_t>();
    if (info.version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(info.version));
    info.spec_hash = r.pod<std::uint64_t>();
    info.seed = r.pod<std::uint64_t>();
    info.iteration = r.pod<std::uint64_t>();
    info.spec = r.text();
    return info;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Network& net, const AdamState& adam,
                     std::uint64_t iteration) {
    const auto params = net.parameters();
    const auto buffers = net.buffers();
    const bool has_moments = !adam.first.empty();
    if (has_moments && (adam.first.size() != params.size() || adam.second.size() != params.size()))
        throw CheckpointError("optimizer state does not match the network");

    Writer w(path);
    w.raw(kMagic, sizeof kMagic);
    w.pod<std::uint32_t>(kCheckpointVersion);
    w.pod<std::uint64_t>(net.spec().hash());
    w.pod<std::uint64_t>(net.spec().seed);
    w.pod<std::uint64_t>(iteration);
    w.text(net.spec().canonical());

    w.pod<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) w.tensor(p.name, p.value);
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(buffers.size()));
    for (const auto& b : buffers) w.tensor(b.name, b.value);

    w.pod<std::uint64_t>(adam.step);
    w.pod<std::uint8_t>(has_moments ? 1 : 0);
    if (has_moments)
        for (std::size_t k = 0; k < params.size(); ++k) {
            w.tensor(params[k].name + ".m", adam.first[k]);
            w.tensor(params[k].name + ".v", adam.second[k]);
        }
    w.finish();
}

CheckpointInfo read_checkpoint_info(const std::filesystem::path& path) {
    Reader r(path);
    return read_header(r);
}

CheckpointInfo load_checkpoint(const std::filesystem::path& path, Network& net, AdamState& adam) {
    Reader r(path);
    const auto info = read_header(r);
    if (info.spec_hash != net.spec().hash())
        throw CheckpointError("checkpoint was written for a different network: " + info.spec);

    auto params = net.parameters();
    auto buffers = net.buffers();
    if (r.pod<std::uint32_t>() != params.size()) throw CheckpointError("checkpoint parameter count mismatch");
    for (auto& p : params) r.tensor(p.name, p.value);
    if (r.pod<std::uint32_t>() != buffers.size()) throw CheckpointError("checkpoint buffer count mismatch");
    for (auto& b : buffers) r.tensor(b.name, b.value);

    AdamState restored;
    const auto step = r.pod<std::uint64_t>();
    if (r.pod<std::uint8_t>() != 0) {
        restored = make_adam_state(params);
        for (std::size_t k = 0; k < params.size(); ++k) {
            r.tensor(params[k].name + ".m", restored.first[k]);
            r.tensor(params[k].name + ".v", restored.second[k]);
        }
    }
    restored.step = step;
    adam = std::move(restored);
    return info;
}

}  // namespace warpconv::nn
