#include "bgrid/gcn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace bgrid::gcn {

Matrix& GcnModel::param(const std::string& name) {
    for (auto& [n, m] : params)
        if (n == name) return m;
    throw std::runtime_error("unknown parameter " + name);
}

const Matrix& GcnModel::param(const std::string& name) const {
    for (const auto& [n, m] : params)
        if (n == name) return m;
    throw std::runtime_error("unknown parameter " + name);
}

namespace {

Matrix glorot(int rows, int cols, std::mt19937_64& rng) {
    double limit = std::sqrt(6.0 / (rows + cols));
    std::uniform_real_distribution<double> uni(-limit, limit);
    Matrix m(rows, cols);
    for (double& v : m.d) v = uni(rng);
    return m;
}

Matrix ones_row(int cols) {
    Matrix m(1, cols);
    for (double& v : m.d) v = 1.0;
    return m;
}

// name.w1/b1 + name.w2/b2 + name.ln_g/ln_b : Linear-act-dropout-Linear-LayerNorm.
void add_mlp_block(GcnModel& model, const std::string& name, int in, int hidden, int out,
                   std::mt19937_64& rng) {
    model.params.emplace_back(name + ".w1", glorot(in, hidden, rng));
    model.params.emplace_back(name + ".b1", Matrix(1, hidden));
    model.params.emplace_back(name + ".w2", glorot(hidden, out, rng));
    model.params.emplace_back(name + ".b2", Matrix(1, out));
    model.params.emplace_back(name + ".ln_g", ones_row(out));
    model.params.emplace_back(name + ".ln_b", Matrix(1, out));
}

}  // namespace

GcnModel init_model(const GcnConfig& config, std::uint64_t seed) {
    GcnModel model;
    model.config = config;
    model.seed = seed;
    std::mt19937_64 rng(seed);

    const int h = config.hidden;
    add_mlp_block(model, "node_enc", config.node_in, h, h, rng);
    model.params.emplace_back("conv1.w", glorot(h, h, rng));
    model.params.emplace_back("conv1.b", Matrix(1, h));
    model.params.emplace_back("conv2.w", glorot(h, h, rng));
    model.params.emplace_back("conv2.b", Matrix(1, h));
    add_mlp_block(model, "ctx", h, h, h, rng);
    add_mlp_block(model, "edge_enc", config.edge_in, h, h, rng);

    int in = 2 * h;
    for (size_t i = 0; i < config.scorer_hidden.size(); ++i) {
        int out = config.scorer_hidden[i];
        model.params.emplace_back("scorer.w" + std::to_string(i + 1), glorot(in, out, rng));
        model.params.emplace_back("scorer.b" + std::to_string(i + 1), Matrix(1, out));
        in = out;
    }
    const std::string last = std::to_string(config.scorer_hidden.size() + 1);
    model.params.emplace_back("scorer.w" + last, glorot(in, 1, rng));
    model.params.emplace_back("scorer.b" + last, Matrix(1, 1));
    return model;
}

namespace {

struct Builder {
    Tape& tape;
    const GcnModel& model;
    bool training;
    std::mt19937_64* rng;
    std::vector<std::pair<std::string, int>> param_nodes;

    int leaf_param(const std::string& name) {
        int node = tape.leaf(model.param(name));
        param_nodes.emplace_back(name, node);
        return node;
    }

    int act(int x) { return model.config.all_sigmoid ? tape.sigmoid(x) : tape.relu(x); }

    int mlp_block(const std::string& name, int x) {
        int h = tape.add_row(tape.matmul(x, leaf_param(name + ".w1")), leaf_param(name + ".b1"));
        h = act(h);
        h = tape.dropout(h, model.config.dropout, rng ? *rng : dummy_rng(), training);
        h = tape.add_row(tape.matmul(h, leaf_param(name + ".w2")), leaf_param(name + ".b2"));
        return tape.layer_norm(h, leaf_param(name + ".ln_g"), leaf_param(name + ".ln_b"));
    }

    static std::mt19937_64& dummy_rng() {
        static std::mt19937_64 rng(0);
        return rng;
    }
};

}  // namespace

ForwardNodes build_forward(Tape& tape, const GcnModel& model, const GraphFeatures& features,
                           bool training, std::mt19937_64* rng) {
    if (features.node_features.cols != model.config.node_in ||
        features.edge_features.cols != model.config.edge_in)
        throw std::runtime_error("feature tables do not match the model configuration");
    if (training && !rng) throw std::runtime_error("training forward requires an rng");

    Builder b{tape, model, training, rng, {}};

    // Node branch: encoder, two graph convolutions act(A_hat*X*W + b), mean
    // pool, context MLP.
    int x = tape.leaf(features.node_features);
    x = b.mlp_block("node_enc", x);
    for (const char* conv : {"conv1", "conv2"}) {
        int h = tape.matmul(x, b.leaf_param(std::string(conv) + ".w"));
        h = tape.spmm_sym(h, &features.adj);
        h = tape.add_row(h, b.leaf_param(std::string(conv) + ".b"));
        x = b.act(h);
    }
    int context = b.mlp_block("ctx", tape.mean_rows(x));

    // Edge branch and fusion.
    int e = tape.leaf(features.edge_features);
    e = b.mlp_block("edge_enc", e);
    int fused = tape.concat_rows_broadcast(e, context);

    const size_t n_hidden = model.config.scorer_hidden.size();
    for (size_t i = 0; i < n_hidden; ++i) {
        fused = tape.add_row(tape.matmul(fused, b.leaf_param("scorer.w" + std::to_string(i + 1))),
                             b.leaf_param("scorer.b" + std::to_string(i + 1)));
        fused = b.act(fused);
    }
    const std::string last = std::to_string(n_hidden + 1);
    fused = tape.add_row(tape.matmul(fused, b.leaf_param("scorer.w" + last)),
                         b.leaf_param("scorer.b" + last));
    int scores = tape.sigmoid(fused);

    return ForwardNodes{scores, std::move(b.param_nodes)};
}

std::vector<double> forward_scores(const GcnModel& model, const GraphFeatures& features) {
    GraphFeatures normalized = features;
    apply_feature_stats(normalized, model.stats);
    Tape tape;
    ForwardNodes nodes = build_forward(tape, model, normalized);
    const Matrix& s = tape.value(nodes.scores);
    return {s.d.begin(), s.d.end()};
}

EdgeScores predict_scores(const GcnModel& model, const TriMesh& mesh, const VertexSizes& sizes) {
    if (!model.trained) throw std::runtime_error("model has not been trained");
    LboValues lbo = compute_lbo(mesh, sizes);
    GraphFeatures features = extract_features(mesh, sizes, lbo);
    EdgeScores out;
    out.edges = features.edges;
    out.scores = forward_scores(model, features);
    return out;
}

EdgeScores predict_scores(const GcnModel& model, const SizingField& field) {
    return predict_scores(model, field.grid(), field.sizes());
}

}  // namespace bgrid::gcn
