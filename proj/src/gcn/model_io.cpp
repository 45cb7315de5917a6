#include "bgrid/gcn/model_io.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace bgrid::gcn {

namespace {

constexpr char kMagic[8] = {'B', 'G', 'R', 'I', 'D', 'G', 'C', 'N'};
constexpr uint32_t kVersion = 1;

struct Writer {
    std::ofstream out;
    explicit Writer(const std::string& path) : out(path, std::ios::binary) {
        if (!out) throw std::runtime_error("cannot write " + path);
    }
    void bytes(const void* data, size_t n) { out.write(static_cast<const char*>(data), n); }
    void u8(uint8_t v) { bytes(&v, 1); }
    void u32(uint32_t v) { bytes(&v, 4); }
    void u64(uint64_t v) { bytes(&v, 8); }
    void f64(double v) { bytes(&v, 8); }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void vec(const std::vector<double>& v) {
        u32(static_cast<uint32_t>(v.size()));
        bytes(v.data(), v.size() * 8);
    }
};

struct Reader {
    std::ifstream in;
    std::string path;
    explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw std::runtime_error("cannot open " + p);
    }
    void bytes(void* data, size_t n) {
        in.read(static_cast<char*>(data), n);
        if (static_cast<size_t>(in.gcount()) != n) throw std::runtime_error(path + ": truncated model file");
    }
    uint8_t u8() { uint8_t v; bytes(&v, 1); return v; }
    uint32_t u32() { uint32_t v; bytes(&v, 4); return v; }
    uint64_t u64() { uint64_t v; bytes(&v, 8); return v; }
    double f64() { double v; bytes(&v, 8); return v; }
    std::string str() {
        uint32_t n = u32();
        if (n > (1u << 20)) throw std::runtime_error(path + ": corrupt string length");
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }
    std::vector<double> vec() {
        uint32_t n = u32();
        if (n > (1u << 28)) throw std::runtime_error(path + ": corrupt vector length");
        std::vector<double> v(n);
        bytes(v.data(), static_cast<size_t>(n) * 8);
        return v;
    }
};

}  // namespace

void save_model(const GcnModel& model, const std::string& path) {
    Writer w(path);
    w.bytes(kMagic, 8);
    w.u32(kVersion);

    w.u32(static_cast<uint32_t>(model.config.node_in));
    w.u32(static_cast<uint32_t>(model.config.edge_in));
    w.u32(static_cast<uint32_t>(model.config.hidden));
    w.u32(static_cast<uint32_t>(model.config.scorer_hidden.size()));
    for (int h : model.config.scorer_hidden) w.u32(static_cast<uint32_t>(h));
    w.f64(model.config.dropout);
    w.u8(model.config.all_sigmoid ? 1 : 0);

    w.u8(model.trained ? 1 : 0);
    w.u32(static_cast<uint32_t>(model.trained_epochs));
    w.f64(model.learning_rate);
    w.u64(model.seed);
    w.f64(model.final_train_loss);
    w.f64(model.final_val_loss);

    w.vec(model.stats.node_mean);
    w.vec(model.stats.node_std);
    w.vec(model.stats.edge_mean);
    w.vec(model.stats.edge_std);

    w.u32(static_cast<uint32_t>(model.params.size()));
    for (const auto& [name, m] : model.params) {
        w.str(name);
        w.u32(static_cast<uint32_t>(m.rows));
        w.u32(static_cast<uint32_t>(m.cols));
        w.bytes(m.d.data(), m.d.size() * 8);
    }
    if (!w.out) throw std::runtime_error("write failure: " + path);
}

GcnModel load_model(const std::string& path) {
    Reader r(path);
    char magic[8];
    r.bytes(magic, 8);
    if (std::string(magic, 8) != std::string(kMagic, 8)) throw std::runtime_error(path + ": not a model file");
    if (r.u32() != kVersion) throw std::runtime_error(path + ": unsupported model version");

    GcnModel model;
    model.config.node_in = static_cast<int>(r.u32());
    model.config.edge_in = static_cast<int>(r.u32());
    model.config.hidden = static_cast<int>(r.u32());
    uint32_t nsh = r.u32();
    if (nsh > 64) throw std::runtime_error(path + ": corrupt scorer configuration");
    model.config.scorer_hidden.clear();
    for (uint32_t i = 0; i < nsh; ++i) model.config.scorer_hidden.push_back(static_cast<int>(r.u32()));
    model.config.dropout = r.f64();
    model.config.all_sigmoid = r.u8() != 0;

    model.trained = r.u8() != 0;
    model.trained_epochs = static_cast<int>(r.u32());
    model.learning_rate = r.f64();
    model.seed = r.u64();
    model.final_train_loss = r.f64();
    model.final_val_loss = r.f64();

    model.stats.node_mean = r.vec();
    model.stats.node_std = r.vec();
    model.stats.edge_mean = r.vec();
    model.stats.edge_std = r.vec();

    // Shapes must match a freshly initialized model of the same config.
    GcnModel reference = init_model(model.config, 0);
    uint32_t count = r.u32();
    if (count != reference.params.size()) throw std::runtime_error(path + ": parameter count mismatch");
    for (uint32_t i = 0; i < count; ++i) {
        std::string name = r.str();
        int rows = static_cast<int>(r.u32());
        int cols = static_cast<int>(r.u32());
        if (name != reference.params[i].first || rows != reference.params[i].second.rows ||
            cols != reference.params[i].second.cols)
            throw std::runtime_error(path + ": tensor name/shape mismatch at " + name);
        Matrix m(rows, cols);
        r.bytes(m.d.data(), m.d.size() * 8);
        model.params.emplace_back(std::move(name), std::move(m));
    }
    return model;
}

}  // namespace bgrid::gcn
