#include "bgrid/gcn/tensor.hpp"

#include <condition_variable>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace bgrid::gcn {

namespace {

// Persistent worker pool. Work is handed out as pre-cut blocks, never split
// dynamically, so the arithmetic of each block does not depend on the number
// of workers.
class Pool {
public:
    static Pool& instance() {
        static Pool pool;
        return pool;
    }

    void run(int blocks, const std::function<void(int)>& body) {
        if (blocks <= 1 || workers_.empty()) {
            for (int b = 0; b < blocks; ++b) body(b);
            return;
        }
        std::lock_guard serialize(run_mutex_);
        std::unique_lock lock(mutex_);
        body_ = &body;
        next_block_ = 0;
        total_blocks_ = blocks;
        pending_ = blocks;
        ++generation_;
        wake_.notify_all();
        // The calling thread works too.
        while (next_block_ < total_blocks_) {
            int b = next_block_++;
            lock.unlock();
            body(b);
            lock.lock();
            --pending_;
        }
        done_.wait(lock, [&] { return pending_ == 0; });
        body_ = nullptr;
    }

private:
    Pool() {
        unsigned n = std::thread::hardware_concurrency();
        unsigned workers = n > 1 ? std::min(n - 1, 7u) : 0;
        for (unsigned i = 0; i < workers; ++i)
            workers_.emplace_back([this] { worker_loop(); });
    }
    ~Pool() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
            wake_.notify_all();
        }
        for (auto& t : workers_) t.join();
    }

    void worker_loop() {
        uint64_t seen = 0;
        while (true) {
            std::unique_lock lock(mutex_);
            wake_.wait(lock, [&] { return stop_ || (generation_ != seen && next_block_ < total_blocks_); });
            if (stop_) return;
            seen = generation_;
            const auto* body = body_;
            while (next_block_ < total_blocks_) {
                int b = next_block_++;
                lock.unlock();
                (*body)(b);
                lock.lock();
                if (--pending_ == 0) done_.notify_all();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex run_mutex_;
    std::mutex mutex_;
    std::condition_variable wake_, done_;
    const std::function<void(int)>* body_ = nullptr;
    int next_block_ = 0, total_blocks_ = 0, pending_ = 0;
    uint64_t generation_ = 0;
    bool stop_ = false;
};

constexpr int kBlocks = 8;
constexpr long kSerialFlops = 1 << 18;

void block_bounds(int n, int blocks, int b, int& begin, int& end) {
    begin = static_cast<int>(static_cast<long>(n) * b / blocks);
    end = static_cast<int>(static_cast<long>(n) * (b + 1) / blocks);
}

}  // namespace

void parallel_blocks(int n, const std::function<void(int, int)>& fn) {
    if (n <= 0) return;
    int blocks = std::min(kBlocks, n);
    Pool::instance().run(blocks, [&](int b) {
        int begin, end;
        block_bounds(n, blocks, b, begin, end);
        if (begin < end) fn(begin, end);
    });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::runtime_error("matmul shape mismatch");
    Matrix c(a.rows, b.cols);
    const int K = a.cols, N = b.cols;
    auto rows = [&](int r0, int r1) {
        for (int i = r0; i < r1; ++i) {
            double* crow = c.row(i);
            const double* arow = a.row(i);
            for (int k = 0; k < K; ++k) {
                const double av = arow[k];
                if (av == 0.0) continue;
                const double* brow = b.row(k);
                for (int j = 0; j < N; ++j) crow[j] += av * brow[j];
            }
        }
    };
    if (static_cast<long>(a.rows) * K * N < kSerialFlops) rows(0, a.rows);
    else parallel_blocks(a.rows, rows);
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw std::runtime_error("matmul_tn shape mismatch");
    const int M = a.rows, K = a.cols, N = b.cols;
    Matrix c(K, N);
    if (static_cast<long>(M) * K * N < kSerialFlops) {
        for (int i = 0; i < M; ++i) {
            const double* arow = a.row(i);
            const double* brow = b.row(i);
            for (int k = 0; k < K; ++k) {
                const double av = arow[k];
                if (av == 0.0) continue;
                double* crow = c.row(k);
                for (int j = 0; j < N; ++j) crow[j] += av * brow[j];
            }
        }
        return c;
    }
    // Fixed block split over input rows; partials reduced in block order.
    const int blocks = kBlocks;
    std::vector<Matrix> partial(blocks);
    Pool::instance().run(blocks, [&](int bidx) {
        int r0, r1;
        block_bounds(M, blocks, bidx, r0, r1);
        Matrix p(K, N);
        for (int i = r0; i < r1; ++i) {
            const double* arow = a.row(i);
            const double* brow = b.row(i);
            for (int k = 0; k < K; ++k) {
                const double av = arow[k];
                if (av == 0.0) continue;
                double* prow = p.row(k);
                for (int j = 0; j < N; ++j) prow[j] += av * brow[j];
            }
        }
        partial[bidx] = std::move(p);
    });
    for (int bidx = 0; bidx < blocks; ++bidx)
        for (size_t i = 0; i < c.size(); ++i) c.d[i] += partial[bidx].d[i];
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw std::runtime_error("matmul_nt shape mismatch");
    // Transpose b once so the inner loop stays contiguous.
    Matrix bt(b.cols, b.rows);
    for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j) bt.at(j, i) = b.at(i, j);

    const int K = a.cols, N = b.rows;
    Matrix c(a.rows, N);
    auto rows = [&](int r0, int r1) {
        for (int i = r0; i < r1; ++i) {
            double* crow = c.row(i);
            const double* arow = a.row(i);
            for (int k = 0; k < K; ++k) {
                const double av = arow[k];
                if (av == 0.0) continue;
                const double* btrow = bt.row(k);
                for (int j = 0; j < N; ++j) crow[j] += av * btrow[j];
            }
        }
    };
    if (static_cast<long>(a.rows) * K * N < kSerialFlops) rows(0, a.rows);
    else parallel_blocks(a.rows, rows);
    return c;
}

Matrix spmm(const Csr& s, const Matrix& x) {
    if (s.n != x.rows) throw std::runtime_error("spmm shape mismatch");
    Matrix y(s.n, x.cols);
    auto rows = [&](int r0, int r1) {
        for (int i = r0; i < r1; ++i) {
            double* yrow = y.row(i);
            for (int e = s.ptr[i]; e < s.ptr[i + 1]; ++e) {
                const double w = s.val[e];
                const double* xrow = x.row(s.idx[e]);
                for (int j = 0; j < x.cols; ++j) yrow[j] += w * xrow[j];
            }
        }
    };
    if (static_cast<long>(s.idx.size()) * x.cols < kSerialFlops) rows(0, s.n);
    else parallel_blocks(s.n, rows);
    return y;
}

}  // namespace bgrid::gcn
