#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include "bgrid/gcn/model.hpp"
#include "bgrid/gcn/model_io.hpp"
#include "bgrid/gcn/train.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace bgrid;
using namespace bgrid::gcn;
using namespace bgrid::test;

namespace {

// Hand-built graph (not from a mesh): fills random-but-deterministic features
// and the normalized adjacency with self loops.
GraphFeatures make_graph(int nodes, const std::vector<std::array<int, 2>>& edges, uint64_t seed) {
    GraphFeatures g;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    g.node_features = Matrix(nodes, 2);
    for (double& v : g.node_features.d) v = uni(rng);
    g.edge_features = Matrix(static_cast<int>(edges.size()), 8);
    for (double& v : g.edge_features.d) v = uni(rng);
    for (const auto& e : edges) {
        g.edges.emplace_back(e[0], e[1]);
        g.edge_rows.push_back(e);
    }
    std::vector<std::vector<int>> nbr(nodes);
    for (const auto& e : edges) {
        nbr[e[0]].push_back(e[1]);
        nbr[e[1]].push_back(e[0]);
    }
    g.adj.n = nodes;
    g.adj.ptr.assign(nodes + 1, 0);
    for (int r = 0; r < nodes; ++r) {
        nbr[r].push_back(r);
        std::sort(nbr[r].begin(), nbr[r].end());
        g.adj.ptr[r + 1] = g.adj.ptr[r] + static_cast<int>(nbr[r].size());
    }
    for (int r = 0; r < nodes; ++r)
        for (int c : nbr[r]) {
            g.adj.idx.push_back(c);
            g.adj.val.push_back(1.0 / std::sqrt(static_cast<double>(nbr[r].size()) *
                                                static_cast<double>(nbr[c].size())));
        }
    return g;
}

const std::vector<std::array<int, 2>> kSmallEdges = {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 4}, {3, 4}};

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("zero weights score exactly one half everywhere") {
    GcnModel model = init_model(GcnConfig{}, 1);
    for (auto& [name, m] : model.params)
        for (double& v : m.d) v = 0.0;
    GraphFeatures g = make_graph(5, kSmallEdges, 2);
    std::vector<double> scores = forward_scores(model, g);
    REQUIRE(scores.size() == 6);
    for (double s : scores) CHECK(s == 0.5);
}

TEST_CASE("scores lie strictly inside (0,1)") {
    GcnModel model = init_model(GcnConfig{}, 3);
    GraphFeatures g = make_graph(9, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 0}},
                                 4);
    for (double s : forward_scores(model, g)) {
        CHECK(s > 0.0);
        CHECK(s < 1.0);
    }
}

TEST_CASE("identical features on a cycle graph score identically") {
    GcnModel model = init_model(GcnConfig{}, 5);
    std::vector<std::array<int, 2>> cycle = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}};
    GraphFeatures g = make_graph(6, cycle, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 2; ++j) g.node_features.at(i, j) = 0.3 * (j + 1);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 8; ++j) g.edge_features.at(i, j) = 0.1 * (j + 1);
    std::vector<double> scores = forward_scores(model, g);
    for (size_t i = 1; i < scores.size(); ++i)
        CHECK(scores[i] == doctest::Approx(scores[0]).epsilon(1e-12));
}

TEST_CASE("relabeling the graph permutes scores identically") {
    GcnModel model = init_model(GcnConfig{}, 7);
    GraphFeatures g = make_graph(5, kSmallEdges, 8);
    std::vector<double> base = forward_scores(model, g);

    // pi reverses node ids; edges are re-listed in reversed row order.
    const int n = 5;
    auto pi = [n](int v) { return n - 1 - v; };
    std::vector<std::array<int, 2>> new_edges;
    std::vector<size_t> row_map;  // new row -> old row
    for (size_t i = kSmallEdges.size(); i-- > 0;) {
        new_edges.push_back({pi(kSmallEdges[i][0]), pi(kSmallEdges[i][1])});
        row_map.push_back(i);
    }
    GraphFeatures p = make_graph(n, new_edges, 8);
    for (int v = 0; v < n; ++v)
        for (int j = 0; j < 2; ++j) p.node_features.at(pi(v), j) = g.node_features.at(v, j);
    for (size_t r = 0; r < new_edges.size(); ++r)
        for (int j = 0; j < 8; ++j)
            p.edge_features.at(static_cast<int>(r), j) =
                g.edge_features.at(static_cast<int>(row_map[r]), j);

    std::vector<double> permuted = forward_scores(model, p);
    for (size_t r = 0; r < new_edges.size(); ++r)
        CHECK(permuted[r] == doctest::Approx(base[row_map[r]]).epsilon(1e-9));
}

TEST_CASE("reverse-mode gradients match central finite differences") {
    GcnConfig config;
    config.dropout = 0.0;  // the check differentiates the deterministic path
    GcnModel model = init_model(config, 11);
    GraphFeatures g = make_graph(5, kSmallEdges, 12);
    std::vector<double> labels = {0.1, 0.9, 0.4, 0.6, 0.25, 0.75};

    Matrix label_m(6, 1);
    for (int i = 0; i < 6; ++i) label_m.d[i] = labels[i];

    auto loss_value = [&]() {
        Tape tape;
        ForwardNodes nodes = build_forward(tape, model, g);
        int loss = tape.mse(nodes.scores, label_m);
        return tape.value(loss).d[0];
    };

    Tape tape;
    ForwardNodes nodes = build_forward(tape, model, g);
    int loss = tape.mse(nodes.scores, label_m);
    tape.backward(loss);

    double worst = 0.0;
    for (auto& [name, node] : nodes.params) {
        Matrix& p = model.param(name);
        const Matrix& grad = tape.grad(node);
        REQUIRE_MESSAGE(!grad.empty(), name);
        // Probe a deterministic selection of entries in every tensor.
        std::vector<size_t> probes = {0, p.size() / 2, p.size() - 1};
        std::mt19937_64 rng(std::hash<std::string>{}(name));
        std::uniform_int_distribution<size_t> pick(0, p.size() - 1);
        probes.push_back(pick(rng));
        for (size_t idx : probes) {
            double saved = p.d[idx];
            double h = 1e-6 * std::max(1.0, std::abs(saved));
            p.d[idx] = saved + h;
            double up = loss_value();
            p.d[idx] = saved - h;
            double down = loss_value();
            p.d[idx] = saved;
            double fd = (up - down) / (2.0 * h);
            double ad = grad.d[idx];
            double rel = std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1e-6});
            worst = std::max(worst, rel);
            CHECK_MESSAGE(rel < 1e-4, name, "[", idx, "] ad=", ad, " fd=", fd);
        }
    }
    MESSAGE("worst relative gradient error: ", worst);
}

TEST_CASE("training overfits a single tiny graph") {
    GraphFeatures g = make_graph(5, kSmallEdges, 21);
    TrainSample sample{g, {0.1, 0.9, 0.4, 0.6, 0.25, 0.75}};

    TrainConfig config;
    config.epochs = 2000;
    config.lr = 1e-3;
    config.lr_step_epochs = 600;
    config.seed = 5;
    config.dropout = 0.0;
    config.val_fraction = 0.0;
    GcnModel model = train({sample}, config);
    CHECK(model.final_train_loss < 1e-3);
    CHECK(model.trained);
}

TEST_CASE("labels at one half with a zero output layer keep the loss at zero") {
    GraphFeatures g = make_graph(5, kSmallEdges, 31);

    // Zero final layer => sigmoid(0) = 0.5 = label, so the loss starts at the
    // optimum and every gradient vanishes (training cannot move away).
    GcnModel model = init_model(GcnConfig{}, 9);
    for (double& v : model.param("scorer.w4").d) v = 0.0;
    for (double& v : model.param("scorer.b4").d) v = 0.0;

    GraphFeatures norm = g;  // stats default-empty: unnormalized
    Tape tape;
    ForwardNodes nodes = build_forward(tape, model, norm);
    Matrix label_m(6, 1);
    for (int i = 0; i < 6; ++i) label_m.d[i] = 0.5;
    int loss = tape.mse(nodes.scores, label_m);
    CHECK(tape.value(loss).d[0] == 0.0);
    tape.backward(loss);
    for (auto& [name, node] : nodes.params) {
        const Matrix& grad = tape.grad(node);
        if (grad.empty()) continue;
        for (double gv : grad.d) CHECK(gv == 0.0);
    }
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
    GraphFeatures g = make_graph(5, kSmallEdges, 41);
    TrainSample sample{g, {0.2, 0.8, 0.5, 0.3, 0.7, 0.6}};
    TrainConfig config;
    config.epochs = 5;
    config.lr = 1e-3;
    config.seed = 77;
    config.val_fraction = 0.0;
    GcnModel a = train({sample}, config);
    GcnModel b = train({sample}, config);
    REQUIRE(a.params.size() == b.params.size());
    for (size_t i = 0; i < a.params.size(); ++i) CHECK(a.params[i].second.d == b.params[i].second.d);
}

TEST_CASE("model save/load round-trips bit-exactly") {
    GraphFeatures g = make_graph(5, kSmallEdges, 51);
    TrainSample sample{g, {0.2, 0.8, 0.5, 0.3, 0.7, 0.6}};
    TrainConfig config;
    config.epochs = 3;
    config.seed = 13;
    config.val_fraction = 0.0;
    GcnModel model = train({sample}, config);

    std::string path = temp_path("bgrid_model.gcn");
    save_model(model, path);
    GcnModel loaded = load_model(path);

    REQUIRE(loaded.params.size() == model.params.size());
    for (size_t i = 0; i < model.params.size(); ++i) {
        CHECK(loaded.params[i].first == model.params[i].first);
        CHECK(loaded.params[i].second.d == model.params[i].second.d);
    }
    CHECK(loaded.seed == model.seed);
    CHECK(loaded.trained_epochs == model.trained_epochs);
    CHECK(loaded.stats.edge_mean == model.stats.edge_mean);

    std::vector<double> s1 = forward_scores(model, g);
    std::vector<double> s2 = forward_scores(loaded, g);
    CHECK(s1 == s2);

    SUBCASE("truncated files are rejected") {
        std::error_code ec;
        auto size = std::filesystem::file_size(path, ec);
        std::filesystem::resize_file(path, size / 2, ec);
        CHECK_THROWS(load_model(path));
    }
}

TEST_CASE("predicting with an untrained model fails") {
    TriMesh m = make_plane_grid(2, 2);
    VertexSizes sizes = init_uniform(m, 1.0);
    GcnModel model = init_model(GcnConfig{}, 1);
    CHECK_THROWS(predict_scores(model, m, sizes));
}

TEST_CASE("feature extraction: equilateral lattice closed forms") {
    TriMesh m = make_equilateral_patch(5, 5);
    VertexSizes sizes = init_uniform(m, 1.0);
    LboValues lbo = compute_lbo(m, sizes);
    GraphFeatures g = extract_features(m, sizes, lbo);

    const double expected_ratio = 2.0 / std::sqrt(3.0);
    int interior_checked = 0;
    for (size_t i = 0; i < g.edges.size(); ++i) {
        const EdgeRef& e = g.edges[i];
        if (m.is_boundary_edge(e) || m.is_boundary_vertex(e.a) || m.is_boundary_vertex(e.b)) continue;
        const double* r = g.edge_features.row(static_cast<int>(i));
        CHECK(r[0] == doctest::Approx(0.0).epsilon(1e-12));            // edge LBO
        CHECK(r[1] == doctest::Approx(0.0));                           // dihedral
        CHECK(r[2] == doctest::Approx(std::numbers::pi / 3).epsilon(1e-9));
        CHECK(r[3] == doctest::Approx(std::numbers::pi / 3).epsilon(1e-9));
        CHECK(r[4] == doctest::Approx(expected_ratio).epsilon(1e-9));
        CHECK(r[5] == doctest::Approx(expected_ratio).epsilon(1e-9));
        CHECK(r[6] == doctest::Approx(1.0).epsilon(1e-9));             // all edges equal
        CHECK(r[7] == doctest::Approx(0.0));                           // normal angle
        ++interior_checked;
    }
    CHECK(interior_checked > 10);
}

TEST_CASE("feature extraction: fold dihedral and long-edge global ratio") {
    SUBCASE("two faces folded at 90 degrees") {
        std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {0.5, 0, 1}};
        TriMesh m = TriMesh::from_buffers(v, {{0, 1, 2}, {1, 0, 3}});
        VertexSizes sizes = init_uniform(m, 1.0);
        GraphFeatures g = extract_features(m, sizes, compute_lbo(m, sizes));
        for (size_t i = 0; i < g.edges.size(); ++i)
            if (g.edges[i] == EdgeRef(0, 1))
                CHECK(g.edge_features.at(static_cast<int>(i), 1) ==
                      doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
    }
    SUBCASE("edge at twice the mean length has global ratio 2") {
        // Equilateral patch (all edges 1) plus a detached diamond whose long
        // edge is engineered to sit at exactly twice the overall mean.
        TriMesh patch = make_equilateral_patch(4, 3);
        int ne_patch = patch.edge_count();
        const double X = 2.2;
        double y = ((ne_patch + 5) * X / 2.0 - ne_patch - X) / 4.0;
        REQUIRE(y > X / 2);
        double h = std::sqrt(y * y - X * X / 4.0);

        std::vector<Vec3> verts;
        std::vector<std::array<int, 3>> faces;
        for (int v = 0; v < patch.vertex_slots(); ++v) verts.push_back(patch.position(v));
        for (int f = 0; f < patch.face_slots(); ++f) faces.push_back(patch.face(f));
        int base = static_cast<int>(verts.size());
        verts.push_back({10.0, 0.0, 0.0});
        verts.push_back({10.0 + X, 0.0, 0.0});
        verts.push_back({10.0 + X / 2, h, 0.0});
        verts.push_back({10.0 + X / 2, -h, 0.0});
        faces.push_back({base, base + 1, base + 2});
        faces.push_back({base + 1, base, base + 3});
        TriMesh m = TriMesh::from_buffers(std::move(verts), std::move(faces));

        VertexSizes sizes = init_uniform(m, 1.0);
        GraphFeatures g = extract_features(m, sizes, compute_lbo(m, sizes));
        bool found = false;
        for (size_t i = 0; i < g.edges.size(); ++i)
            if (g.edges[i] == EdgeRef(base, base + 1)) {
                CHECK(g.edge_features.at(static_cast<int>(i), 6) == doctest::Approx(2.0).epsilon(1e-9));
                found = true;
            }
        CHECK(found);
    }
}

TEST_CASE("degenerate faces clamp the length/height ratio") {
    std::vector<Vec3> v = {{0, 0, 0}, {1, 0, 0}, {0.5, 2e-7, 0}, {0.5, -1, 0}};
    TriMesh m = TriMesh::from_buffers(v, {{0, 1, 2}, {1, 0, 3}});
    VertexSizes sizes = init_uniform(m, 1.0);
    GraphFeatures g = extract_features(m, sizes, compute_lbo(m, sizes));
    for (size_t i = 0; i < g.edges.size(); ++i)
        for (int j = 0; j < 8; ++j) {
            CHECK(std::isfinite(g.edge_features.at(static_cast<int>(i), j)));
            CHECK(g.edge_features.at(static_cast<int>(i), j) <= 1e6);
        }
}

TEST_CASE("non-finite labels or mismatched counts are rejected") {
    GraphFeatures g = make_graph(5, kSmallEdges, 61);
    TrainConfig config;
    config.epochs = 1;
    CHECK_THROWS(train({TrainSample{g, {0.5}}}, config));             // wrong count
    CHECK_THROWS(train({TrainSample{g, {0, 0, 0, 0, 0, 1.5}}}, config));  // out of range
    CHECK_THROWS(train(std::vector<TrainSample>{}, config));          // empty dataset
}
