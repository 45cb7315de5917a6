#pragma once

#include "bgrid/gcn/model.hpp"

#include <vector>

namespace bgrid::gcn {

struct TrainSample {
    GraphFeatures features;        // raw (unnormalized)
    std::vector<double> labels;    // per edge, in [0,1]
};

struct TrainConfig {
    int epochs = 1200;
    double lr = 1e-4;
    int lr_step_epochs = 300;      // stepwise decay
    double lr_decay = 0.5;
    std::uint64_t seed = 1;
    double dropout = 0.1;
    double val_fraction = 0.2;     // every k-th sample is held out
    bool all_sigmoid = false;
    int log_every = 0;             // 0: silent; otherwise epochs between stderr lines
};

// Full-batch Adam per graph, MSE against the label scores. Bit-reproducible
// for a fixed seed on one machine configuration. Throws on non-finite loss.
GcnModel train(const std::vector<TrainSample>& dataset, const TrainConfig& config);

// Mean MSE of the model over samples (dropout off).
double evaluate_mse(const GcnModel& model, const std::vector<TrainSample>& samples);

}  // namespace bgrid::gcn
