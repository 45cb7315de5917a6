#include "bgrid/gcn/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace bgrid::gcn {

namespace {
constexpr double kLnEps = 1e-5;
}

int Tape::push(Matrix value, std::function<void(Tape&, int)> back) {
    nodes_.push_back(Node{std::move(value), Matrix{}, std::move(back)});
    return static_cast<int>(nodes_.size()) - 1;
}

Matrix& Tape::grad_ref(int node) {
    Node& n = nodes_[node];
    if (n.grad.empty()) n.grad = Matrix(n.value.rows, n.value.cols);
    return n.grad;
}

void Tape::accumulate(int node, const Matrix& g) {
    Matrix& dst = grad_ref(node);
    for (size_t i = 0; i < dst.size(); ++i) dst.d[i] += g.d[i];
}

int Tape::leaf(Matrix value) { return push(std::move(value), nullptr); }

int Tape::matmul(int a, int b) {
    Matrix y = bgrid::gcn::matmul(nodes_[a].value, nodes_[b].value);
    return push(std::move(y), [a, b](Tape& t, int self) {
        const Matrix& dy = t.nodes_[self].grad;
        t.accumulate(a, matmul_nt(dy, t.nodes_[b].value));  // dA = dY * B^T
        t.accumulate(b, matmul_tn(t.nodes_[a].value, dy));  // dB = A^T * dY
    });
}

int Tape::add_row(int x, int bias) {
    const Matrix& xv = nodes_[x].value;
    const Matrix& bv = nodes_[bias].value;
    if (bv.rows != 1 || bv.cols != xv.cols) throw std::runtime_error("add_row shape mismatch");
    Matrix y = xv;
    for (int i = 0; i < y.rows; ++i) {
        double* row = y.row(i);
        for (int j = 0; j < y.cols; ++j) row[j] += bv.d[j];
    }
    return push(std::move(y), [x, bias](Tape& t, int self) {
        const Matrix& dy = t.nodes_[self].grad;
        t.accumulate(x, dy);
        Matrix db(1, dy.cols);
        for (int i = 0; i < dy.rows; ++i) {
            const double* row = dy.row(i);
            for (int j = 0; j < dy.cols; ++j) db.d[j] += row[j];
        }
        t.accumulate(bias, db);
    });
}

int Tape::relu(int x) {
    Matrix y = nodes_[x].value;
    for (double& v : y.d) v = v > 0.0 ? v : 0.0;
    return push(std::move(y), [x](Tape& t, int self) {
        const Matrix& dy = t.nodes_[self].grad;
        const Matrix& xv = t.nodes_[x].value;
        Matrix dx(dy.rows, dy.cols);
        for (size_t i = 0; i < dx.size(); ++i) dx.d[i] = xv.d[i] > 0.0 ? dy.d[i] : 0.0;
        t.accumulate(x, dx);
    });
}

int Tape::sigmoid(int x) {
    Matrix y = nodes_[x].value;
    for (double& v : y.d) v = 1.0 / (1.0 + std::exp(-v));
    return push(std::move(y), [x](Tape& t, int self) {
        const Matrix& dy = t.nodes_[self].grad;
        const Matrix& yv = t.nodes_[self].value;
        Matrix dx(dy.rows, dy.cols);
        for (size_t i = 0; i < dx.size(); ++i) dx.d[i] = dy.d[i] * yv.d[i] * (1.0 - yv.d[i]);
        t.accumulate(x, dx);
    });
}

int Tape::layer_norm(int x, int gain, int bias) {
    const Matrix& xv = nodes_[x].value;
    const Matrix& gv = nodes_[gain].value;
    const Matrix& bv = nodes_[bias].value;
    if (gv.cols != xv.cols || bv.cols != xv.cols) throw std::runtime_error("layer_norm shape mismatch");

    Matrix y(xv.rows, xv.cols);
    Matrix xhat(xv.rows, xv.cols);
    std::vector<double> inv_std(xv.rows);
    const int c = xv.cols;
    for (int i = 0; i < xv.rows; ++i) {
        const double* row = xv.row(i);
        double mean = 0.0;
        for (int j = 0; j < c; ++j) mean += row[j];
        mean /= c;
        double var = 0.0;
        for (int j = 0; j < c; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= c;
        double is = 1.0 / std::sqrt(var + kLnEps);
        inv_std[i] = is;
        for (int j = 0; j < c; ++j) {
            double xh = (row[j] - mean) * is;
            xhat.at(i, j) = xh;
            y.at(i, j) = gv.d[j] * xh + bv.d[j];
        }
    }
    return push(std::move(y), [x, gain, bias, xhat = std::move(xhat),
                               inv_std = std::move(inv_std)](Tape& t, int self) {
        const Matrix& dy = t.nodes_[self].grad;
        const Matrix& gv = t.nodes_[gain].value;
        const int c = dy.cols;
        Matrix dx(dy.rows, dy.cols), dg(1, c), db(1, c);
        for (int i = 0; i < dy.rows; ++i) {
            const double* dyr = dy.row(i);
            const double* xhr = xhat.row(i);
            double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
            for (int j = 0; j < c; ++j) {
                double dxh = dyr[j] * gv.d[j];
                mean_dxhat += dxh;
                mean_dxhat_xhat += dxh * xhr[j];
                dg.d[j] += dyr[j] * xhr[j];
                db.d[j] += dyr[j];
            }
            mean_dxhat /= c;
            mean_dxhat_xhat /= c;
            for (int j = 0; j < c; ++j) {
                double dxh = dyr[j] * gv.d[j];
                dx.at(i, j) = inv_std[i] * (dxh - mean_dxhat - xhr[j] * mean_dxhat_xhat);
            }
        }
        t.accumulate(x, dx);
        t.accumulate(gain, dg);
        t.accumulate(bias, db);
    });
}

int Tape::dropout(int x, double rate, std::mt19937_64& rng, bool enabled) {
    if (!enabled || rate <= 0.0) {
        // Identity pass-through keeps the node graph uniform.
        Matrix y = nodes_[x].value;
        return push(std::move(y), [x](Tape& t, int self) { t.accumulate(x, t.nodes_[self].grad); });
    }
    const double keep = 1.0 - rate;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Matrix y = nodes_[x].value;
    std::vector<char> mask(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
        mask[i] = uni(rng) < keep;
        y.d[i] = mask[i] ? y.d[i] / keep : 0.0;  // inverted dropout
    }
    return push(std::move(y), [x, keep, mask = std::move(mask)](Tape& t, int self) {
        const Matrix& dy = t.nodes_[self].grad;
        Matrix dx(dy.rows, dy.cols);
        for (size_t i = 0; i < dx.size(); ++i) dx.d[i] = mask[i] ? dy.d[i] / keep : 0.0;
        t.accumulate(x, dx);
    });
}

int Tape::spmm_sym(int x, const Csr* adj) {
    Matrix y = spmm(*adj, nodes_[x].value);
    return push(std::move(y), [x, adj](Tape& t, int self) {
        t.accumulate(x, spmm(*adj, t.nodes_[self].grad));  // S symmetric: dX = S^T dY = S dY
    });
}

int Tape::mean_rows(int x) {
    const Matrix& xv = nodes_[x].value;
    Matrix y(1, xv.cols);
    for (int i = 0; i < xv.rows; ++i) {
        const double* row = xv.row(i);
        for (int j = 0; j < xv.cols; ++j) y.d[j] += row[j];
    }
    for (double& v : y.d) v /= xv.rows;
    return push(std::move(y), [x](Tape& t, int self) {
        const Matrix& dy = t.nodes_[self].grad;
        const Matrix& xv = t.nodes_[x].value;
        Matrix dx(xv.rows, xv.cols);
        for (int i = 0; i < xv.rows; ++i)
            for (int j = 0; j < xv.cols; ++j) dx.at(i, j) = dy.d[j] / xv.rows;
        t.accumulate(x, dx);
    });
}

int Tape::concat_rows_broadcast(int left, int right_single_row) {
    const Matrix& lv = nodes_[left].value;
    const Matrix& rv = nodes_[right_single_row].value;
    if (rv.rows != 1) throw std::runtime_error("concat: right operand must be a single row");
    Matrix y(lv.rows, lv.cols + rv.cols);
    for (int i = 0; i < lv.rows; ++i) {
        double* row = y.row(i);
        const double* lrow = lv.row(i);
        for (int j = 0; j < lv.cols; ++j) row[j] = lrow[j];
        for (int j = 0; j < rv.cols; ++j) row[lv.cols + j] = rv.d[j];
    }
    return push(std::move(y), [left, right_single_row](Tape& t, int self) {
        const Matrix& dy = t.nodes_[self].grad;
        const Matrix& lv = t.nodes_[left].value;
        const Matrix& rv = t.nodes_[right_single_row].value;
        Matrix dl(lv.rows, lv.cols), dr(1, rv.cols);
        for (int i = 0; i < lv.rows; ++i) {
            const double* dyr = dy.row(i);
            double* dlr = dl.row(i);
            for (int j = 0; j < lv.cols; ++j) dlr[j] = dyr[j];
            for (int j = 0; j < rv.cols; ++j) dr.d[j] += dyr[lv.cols + j];
        }
        t.accumulate(left, dl);
        t.accumulate(right_single_row, dr);
    });
}

int Tape::mse(int pred, const Matrix& labels) {
    const Matrix& pv = nodes_[pred].value;
    if (pv.rows != labels.rows || pv.cols != labels.cols) throw std::runtime_error("mse shape mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < pv.size(); ++i) {
        double diff = pv.d[i] - labels.d[i];
        acc += diff * diff;
    }
    Matrix y(1, 1);
    y.d[0] = acc / static_cast<double>(pv.size());
    return push(std::move(y), [pred, labels](Tape& t, int self) {
        const double dy = t.nodes_[self].grad.d[0];
        const Matrix& pv = t.nodes_[pred].value;
        Matrix dx(pv.rows, pv.cols);
        const double scale = 2.0 * dy / static_cast<double>(pv.size());
        for (size_t i = 0; i < pv.size(); ++i) dx.d[i] = scale * (pv.d[i] - labels.d[i]);
        t.accumulate(pred, dx);
    });
}

void Tape::backward(int loss_node) {
    grad_ref(loss_node);
    nodes_[loss_node].grad.d.assign(nodes_[loss_node].grad.size(), 0.0);
    nodes_[loss_node].grad.d[0] = 1.0;
    for (int i = loss_node; i >= 0; --i) {
        Node& n = nodes_[i];
        if (!n.back || n.grad.empty()) continue;
        n.back(*this, i);
    }
}

}  // namespace bgrid::gcn
