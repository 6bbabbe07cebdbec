#include <bit>
#include <cstring>
#include <fstream>

#include "pidlr/errors.hpp"
#include "pidlr/model.hpp"

namespace pidlr {

namespace {

constexpr char kMagic[8] = {'P', 'I', 'D', 'L', 'R', 'C', 'K', 'P'};
constexpr uint32_t kVersion = 1;

// Payloads are little-endian float32. The build targets little-endian hosts;
// fail loudly elsewhere rather than write byte-swapped files.
static_assert(std::endian::native == std::endian::little, "little-endian host required");

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw CheckpointError("truncated checkpoint");
}

void write_string(std::ostream& os, const std::string& s) {
    write_pod(os, static_cast<uint64_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    uint64_t len;
    read_pod(is, len);
    std::string s(len, '\0');
    is.read(s.data(), static_cast<std::streamsize>(len));
    if (!is) throw CheckpointError("truncated checkpoint");
    return s;
}

struct NamedTensor {
    std::string name;
    const Mat* mat;
};

std::vector<NamedTensor> named_tensors(const HintModel& m) {
    std::vector<NamedTensor> out;
    auto params = m.tensors();
    const auto& names = HintModel::tensor_names();
    for (size_t i = 0; i < params.size(); ++i) out.push_back({names[i], params[i]});
    for (size_t i = 0; i < params.size(); ++i) out.push_back({"adam_m." + names[i], &m.adam_m[i]});
    for (size_t i = 0; i < params.size(); ++i) out.push_back({"adam_v." + names[i], &m.adam_v[i]});
    return out;
}

}  // namespace

void save_checkpoint(const HintModel& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot open for writing: " + path);

    os.write(kMagic, sizeof(kMagic));
    write_pod(os, kVersion);
    write_string(os, m.cfg.canonical_text());
    write_pod(os, static_cast<uint64_t>(m.num_users));
    write_pod(os, static_cast<uint64_t>(m.num_items));
    write_pod(os, static_cast<uint64_t>(m.num_tuples));
    write_pod(os, m.adam_step);

    auto tensors = named_tensors(m);
    write_pod(os, static_cast<uint32_t>(tensors.size()));
    uint64_t offset = 0;
    for (const auto& t : tensors) {
        write_string(os, t.name);
        write_pod(os, static_cast<uint64_t>(t.mat->rows));
        write_pod(os, static_cast<uint64_t>(t.mat->cols));
        write_pod(os, offset);
        offset += t.mat->size() * sizeof(float);
    }
    write_pod(os, offset);  // total payload bytes
    for (const auto& t : tensors)
        os.write(reinterpret_cast<const char*>(t.mat->a.data()),
                 static_cast<std::streamsize>(t.mat->size() * sizeof(float)));
    if (!os) throw CheckpointError("write failure: " + path);
}

HintModel load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw CheckpointError("cannot open: " + path);

    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError("bad magic: not a checkpoint file: " + path);
    uint32_t version;
    read_pod(is, version);
    if (version != kVersion)
        throw CheckpointError("checkpoint version " + std::to_string(version) + " != supported " +
                              std::to_string(kVersion));

    HintModel m;
    m.cfg = TrainConfig::from_canonical_text(read_string(is));
    uint64_t users, items, tuples;
    read_pod(is, users);
    read_pod(is, items);
    read_pod(is, tuples);
    read_pod(is, m.adam_step);
    m.num_users = users;
    m.num_items = items;
    m.num_tuples = tuples;

    // Build the expected shapes from the config echo, then verify against the
    // stored manifest.
    Rng throwaway(0);
    HintModel shape = init_model(m.cfg, users, items, tuples, throwaway);
    m.user_emb = Mat(shape.user_emb.rows, shape.user_emb.cols);
    m.item_emb = Mat(shape.item_emb.rows, shape.item_emb.cols);
    m.tuple_emb = Mat(shape.tuple_emb.rows, shape.tuple_emb.cols);
    m.w_c = Mat(shape.w_c.rows, shape.w_c.cols);
    m.w_cp = Mat(shape.w_cp.rows, shape.w_cp.cols);
    m.w_u = Mat(shape.w_u.rows, shape.w_u.cols);
    m.w_up = Mat(shape.w_up.rows, shape.w_up.cols);
    m.w_v = Mat(shape.w_v.rows, shape.w_v.cols);
    m.w_vp = Mat(shape.w_vp.rows, shape.w_vp.cols);
    m.mlp_w1 = Mat(shape.mlp_w1.rows, shape.mlp_w1.cols);
    m.mlp_b1 = Mat(shape.mlp_b1.rows, shape.mlp_b1.cols);
    m.mlp_w2 = Mat(shape.mlp_w2.rows, shape.mlp_w2.cols);
    m.mlp_b2 = Mat(shape.mlp_b2.rows, shape.mlp_b2.cols);
    for (Mat* t : m.tensors()) {
        m.adam_m.emplace_back(t->rows, t->cols);
        m.adam_v.emplace_back(t->rows, t->cols);
    }

    std::vector<Mat*> slots;
    std::vector<std::string> expect_names;
    {
        auto params = m.tensors();
        const auto& names = HintModel::tensor_names();
        for (size_t i = 0; i < params.size(); ++i) {
            slots.push_back(params[i]);
            expect_names.push_back(names[i]);
        }
        for (size_t i = 0; i < params.size(); ++i) {
            slots.push_back(&m.adam_m[i]);
            expect_names.push_back("adam_m." + names[i]);
        }
        for (size_t i = 0; i < params.size(); ++i) {
            slots.push_back(&m.adam_v[i]);
            expect_names.push_back("adam_v." + names[i]);
        }
    }

    uint32_t count;
    read_pod(is, count);
    if (count != slots.size())
        throw CheckpointError("tensor count " + std::to_string(count) + " != expected " +
                              std::to_string(slots.size()));
    uint64_t expect_offset = 0;
    for (size_t i = 0; i < slots.size(); ++i) {
        std::string name = read_string(is);
        uint64_t rows, cols, offset;
        read_pod(is, rows);
        read_pod(is, cols);
        read_pod(is, offset);
        if (name != expect_names[i])
            throw CheckpointError("manifest tensor '" + name + "' != expected '" +
                                  expect_names[i] + "'");
        if (rows != slots[i]->rows || cols != slots[i]->cols)
            throw CheckpointError("shape mismatch for " + name + ": file " + std::to_string(rows) +
                                  "x" + std::to_string(cols) + ", config implies " +
                                  std::to_string(slots[i]->rows) + "x" +
                                  std::to_string(slots[i]->cols));
        if (offset != expect_offset)
            throw CheckpointError("bad payload offset for " + name);
        expect_offset += slots[i]->size() * sizeof(float);
    }
    uint64_t payload_bytes;
    read_pod(is, payload_bytes);
    if (payload_bytes != expect_offset) throw CheckpointError("payload size mismatch");

    for (Mat* t : slots) {
        is.read(reinterpret_cast<char*>(t->a.data()),
                static_cast<std::streamsize>(t->size() * sizeof(float)));
        if (!is) throw CheckpointError("truncated checkpoint payload");
    }
    char extra;
    if (is.read(&extra, 1)) throw CheckpointError("trailing bytes after payload");
    return m;
}

HintModel load_checkpoint(const std::string& path, const TrainConfig& cfg) {
    HintModel m = load_checkpoint(path);
    if (m.cfg.canonical_text() != cfg.canonical_text())
        throw CheckpointError("checkpoint config echo does not match run config");
    return m;
}

}  // namespace pidlr
