#pragma once

#include "bgrid/gcn/features.hpp"
#include "bgrid/gcn/tape.hpp"
#include "bgrid/gcn/tensor.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bgrid::gcn {

struct GcnConfig {
    int node_in = 2;
    int edge_in = 8;
    int hidden = 128;
    std::vector<int> scorer_hidden = {512, 256, 128};
    double dropout = 0.1;
    bool all_sigmoid = false;  // ablation: sigmoid instead of ReLU everywhere

    bool operator==(const GcnConfig&) const = default;
};

// Dual-branch edge scorer: node branch (MLP encoder, two graph convolutions,
// mean pool, context MLP) fused by concatenation into the edge branch (MLP
// encoder), followed by the scorer head with a final sigmoid.
struct GcnModel {
    GcnConfig config;
    std::vector<std::pair<std::string, Matrix>> params;  // fixed order
    FeatureStats stats;

    bool trained = false;
    int trained_epochs = 0;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    double final_train_loss = -1.0;
    double final_val_loss = -1.0;

    Matrix& param(const std::string& name);
    const Matrix& param(const std::string& name) const;
};

// Glorot-uniform weights, zero biases, unit LayerNorm gains.
GcnModel init_model(const GcnConfig& config, std::uint64_t seed);

struct ForwardNodes {
    int scores = -1;                                     // E x 1 node id
    std::vector<std::pair<std::string, int>> params;     // tape leaf per parameter
};

// Builds the forward graph on the tape. Features must already be normalized.
// Dropout is active only when training is set; rng must then be non-null.
ForwardNodes build_forward(Tape& tape, const GcnModel& model, const GraphFeatures& features,
                           bool training = false, std::mt19937_64* rng = nullptr);

// Convenience inference on raw (unnormalized) features.
std::vector<double> forward_scores(const GcnModel& model, const GraphFeatures& features);

struct EdgeScores {
    std::vector<EdgeRef> edges;
    std::vector<double> scores;
};

// Full inference path: LBO, feature extraction, normalization, forward.
EdgeScores predict_scores(const GcnModel& model, const SizingField& field);
EdgeScores predict_scores(const GcnModel& model, const TriMesh& mesh, const VertexSizes& sizes);

}  // namespace bgrid::gcn
