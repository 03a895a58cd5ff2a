#include "mcc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace mcc {

namespace {

constexpr char kMagic[8] = {'M', 'C', 'C', 'F', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    std::uint64_t v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t& off) {
    if (off + 4 > in.size()) throw IoError("deserialize: truncated u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[off + i]) << (8 * i);
    off += 4;
    return v;
}

double get_f64(const std::vector<std::uint8_t>& in, std::size_t& off) {
    if (off + 8 > in.size()) throw IoError("deserialize: truncated f64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[off + i]) << (8 * i);
    off += 8;
    return std::bit_cast<double>(v);
}

}  // namespace

std::vector<std::uint8_t> serialize_stack(const MlpParams& p) {
    std::vector<std::uint8_t> out;
    put_u32(out, static_cast<std::uint32_t>(p.layers.size()));
    for (const Layer& l : p.layers) {
        put_u32(out, static_cast<std::uint32_t>(l.out_dim()));
        put_u32(out, static_cast<std::uint32_t>(l.in_dim()));
        put_u32(out, static_cast<std::uint32_t>(l.act));
    }
    for (const Layer& l : p.layers) {
        for (const Vec& row : l.w) {
            for (double d : row) put_f64(out, d);
        }
        for (double d : l.b) put_f64(out, d);
    }
    return out;
}

MlpParams deserialize_stack(const std::vector<std::uint8_t>& bytes, std::size_t* offset) {
    std::size_t off = offset ? *offset : 0;
    MlpParams p;
    std::uint32_t nlayers = get_u32(bytes, off);
    p.layers.resize(nlayers);
    for (Layer& l : p.layers) {
        std::uint32_t out_d = get_u32(bytes, off);
        std::uint32_t in_d = get_u32(bytes, off);
        std::uint32_t act = get_u32(bytes, off);
        if (act > 1) throw IoError("deserialize: bad activation tag");
        l.act = static_cast<Activation>(act);
        l.w.assign(out_d, Vec(in_d));
        l.b.assign(out_d, 0.0);
    }
    for (Layer& l : p.layers) {
        for (Vec& row : l.w) {
            for (double& d : row) d = get_f64(bytes, off);
        }
        for (double& d : l.b) d = get_f64(bytes, off);
    }
    p.version = 1;
    if (offset) *offset = off;
    return p;
}

std::vector<std::uint8_t> serialize_model(const MccModel& model) {
    std::vector<std::uint8_t> out(kMagic, kMagic + 8);
    put_u32(out, kFormatVersion);
    const MlpParams* stacks[6] = {&model.online.f,  &model.online.g_i, &model.online.g_c,
                                  &model.target.f, &model.target.g_i, &model.target.g_c};
    for (const MlpParams* s : stacks) {
        std::vector<std::uint8_t> b = serialize_stack(*s);
        put_u32(out, static_cast<std::uint32_t>(b.size()));
        out.insert(out.end(), b.begin(), b.end());
    }
    return out;
}

MccModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
        throw IoError("checkpoint: bad magic");
    }
    std::size_t off = 8;
    std::uint32_t ver = get_u32(bytes, off);
    if (ver != kFormatVersion) throw IoError("checkpoint: unsupported format version");
    MccModel model;
    MlpParams* stacks[6] = {&model.online.f,  &model.online.g_i, &model.online.g_c,
                            &model.target.f, &model.target.g_i, &model.target.g_c};
    for (MlpParams* s : stacks) {
        std::uint32_t len = get_u32(bytes, off);
        if (off + len > bytes.size()) throw IoError("checkpoint: truncated stack");
        std::size_t stack_off = off;
        *s = deserialize_stack(bytes, &stack_off);
        if (stack_off != off + len) throw IoError("checkpoint: stack length mismatch");
        off = stack_off;
    }
    return model;
}

void save_checkpoint(const MccModel& model, const std::string& path) {
    std::vector<std::uint8_t> bytes = serialize_model(model);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("save_checkpoint: cannot open " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("save_checkpoint: write failed for " + path);
}

MccModel load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("load_checkpoint: cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace mcc
