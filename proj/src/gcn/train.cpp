#include "bgrid/gcn/train.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace bgrid::gcn {

namespace {

struct AdamState {
    std::vector<Matrix> m, v;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long t = 0;

    explicit AdamState(const GcnModel& model) {
        for (const auto& [name, p] : model.params) {
            m.emplace_back(p.rows, p.cols);
            v.emplace_back(p.rows, p.cols);
        }
    }

    void step(GcnModel& model, const std::vector<Matrix>& grads, double lr) {
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, t);
        const double bc2 = 1.0 - std::pow(beta2, t);
        for (size_t i = 0; i < model.params.size(); ++i) {
            Matrix& p = model.params[i].second;
            const Matrix& g = grads[i];
            for (size_t k = 0; k < p.size(); ++k) {
                double gk = g.d[k];
                m[i].d[k] = beta1 * m[i].d[k] + (1.0 - beta1) * gk;
                v[i].d[k] = beta2 * v[i].d[k] + (1.0 - beta2) * gk * gk;
                double mhat = m[i].d[k] / bc1;
                double vhat = v[i].d[k] / bc2;
                p.d[k] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }
};

Matrix labels_matrix(const std::vector<double>& labels) {
    Matrix m(static_cast<int>(labels.size()), 1);
    for (size_t i = 0; i < labels.size(); ++i) m.d[i] = labels[i];
    return m;
}

}  // namespace

double evaluate_mse(const GcnModel& model, const std::vector<TrainSample>& samples) {
    if (samples.empty()) return -1.0;
    double acc = 0.0;
    for (const TrainSample& s : samples) {
        std::vector<double> pred = forward_scores(model, s.features);
        double mse = 0.0;
        for (size_t i = 0; i < pred.size(); ++i) {
            double diff = pred[i] - s.labels[i];
            mse += diff * diff;
        }
        acc += mse / static_cast<double>(pred.size());
    }
    return acc / static_cast<double>(samples.size());
}

GcnModel train(const std::vector<TrainSample>& dataset, const TrainConfig& config) {
    if (dataset.empty()) throw std::runtime_error("training requires a non-empty dataset");
    for (const TrainSample& s : dataset) {
        if (s.labels.size() != static_cast<size_t>(s.features.edge_features.rows))
            throw std::runtime_error("label count does not match edge count");
        for (double l : s.labels)
            if (!(l >= 0.0 && l <= 1.0)) throw std::runtime_error("labels must lie in [0,1]");
    }

    // Deterministic holdout: every k-th sample validates.
    std::vector<const TrainSample*> train_set, val_set;
    int stride = config.val_fraction > 0.0 ? std::max(2, static_cast<int>(std::lround(1.0 / config.val_fraction)))
                                           : 0;
    for (size_t i = 0; i < dataset.size(); ++i) {
        if (stride > 0 && dataset.size() > 1 && i % stride == static_cast<size_t>(stride - 1))
            val_set.push_back(&dataset[i]);
        else
            train_set.push_back(&dataset[i]);
    }
    if (train_set.empty()) train_set.push_back(&dataset[0]);

    GcnConfig mc;
    mc.dropout = config.dropout;
    mc.all_sigmoid = config.all_sigmoid;
    GcnModel model = init_model(mc, config.seed);
    model.learning_rate = config.lr;

    // Normalization stats come from the training split only.
    std::vector<const GraphFeatures*> train_features;
    for (const TrainSample* s : train_set) train_features.push_back(&s->features);
    model.stats = compute_feature_stats(train_features);

    std::vector<TrainSample> norm_train;
    for (const TrainSample* s : train_set) {
        TrainSample n{s->features, s->labels};
        apply_feature_stats(n.features, model.stats);
        norm_train.push_back(std::move(n));
    }

    AdamState adam(model);
    std::mt19937_64 dropout_rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<Matrix> grads(model.params.size());

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const double lr =
            config.lr * std::pow(config.lr_decay, config.lr_step_epochs > 0 ? epoch / config.lr_step_epochs : 0);
        double epoch_loss = 0.0;
        for (const TrainSample& s : norm_train) {
            Tape tape;
            ForwardNodes nodes = build_forward(tape, model, s.features, true, &dropout_rng);
            int loss = tape.mse(nodes.scores, labels_matrix(s.labels));
            const double loss_value = tape.value(loss).d[0];
            if (!std::isfinite(loss_value))
                throw std::runtime_error("non-finite training loss at epoch " + std::to_string(epoch));
            epoch_loss += loss_value;
            tape.backward(loss);
            // Leaf creation order inside the forward builder is unspecified;
            // match gradients to parameters by name.
            for (size_t i = 0; i < model.params.size(); ++i) {
                const std::string& name = model.params[i].first;
                int node = -1;
                for (const auto& [n, id] : nodes.params)
                    if (n == name) { node = id; break; }
                if (node < 0) throw std::runtime_error("parameter " + name + " missing from forward graph");
                grads[i] = tape.grad(node);
                if (grads[i].empty()) grads[i] = Matrix(model.params[i].second.rows, model.params[i].second.cols);
            }
            adam.step(model, grads, lr);
        }
        if (config.log_every > 0 && (epoch % config.log_every == 0 || epoch == config.epochs - 1))
            std::fprintf(stderr, "epoch %d loss %.6g lr %.3g\n", epoch,
                         epoch_loss / static_cast<double>(norm_train.size()), lr);
    }

    model.trained = true;
    model.trained_epochs = config.epochs;

    // Final losses on the raw splits (forward_scores applies the stats).
    std::vector<TrainSample> raw_train, raw_val;
    for (const TrainSample* s : train_set) raw_train.push_back(*s);
    for (const TrainSample* s : val_set) raw_val.push_back(*s);
    model.final_train_loss = evaluate_mse(model, raw_train);
    model.final_val_loss = raw_val.empty() ? -1.0 : evaluate_mse(model, raw_val);
    return model;
}

}  // namespace bgrid::gcn
