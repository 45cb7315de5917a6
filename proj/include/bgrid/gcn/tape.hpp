#pragma once

#include "bgrid/gcn/tensor.hpp"

#include <functional>
#include <random>
#include <vector>

namespace bgrid::gcn {

// Reverse-mode autodiff over dense matrices. Nodes are created in topological
// order; backward() walks them in reverse. Values are computed eagerly.
class Tape {
public:
    int leaf(Matrix value);

    int matmul(int a, int b);
    int add_row(int x, int bias);                 // bias broadcast over rows
    int relu(int x);
    int sigmoid(int x);
    int layer_norm(int x, int gain, int bias);    // row-wise, eps 1e-5
    int dropout(int x, double rate, std::mt19937_64& rng, bool enabled);
    int spmm_sym(int x, const Csr* adj);          // adj must outlive the tape
    int mean_rows(int x);
    int concat_rows_broadcast(int left, int right_single_row);
    int mse(int pred, const Matrix& labels);      // mean squared error, 1x1

    const Matrix& value(int node) const { return nodes_[node].value; }
    const Matrix& grad(int node) const { return nodes_[node].grad; }

    void backward(int loss_node);

private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void(Tape&, int)> back;  // pulls grad into parents
    };
    std::vector<Node> nodes_;

    int push(Matrix value, std::function<void(Tape&, int)> back);
    Matrix& grad_ref(int node);
    void accumulate(int node, const Matrix& g);
};

}  // namespace bgrid::gcn
