// bgrid: build, smooth, simplify and query triangular background grids
// carrying mesh sizing fields.

#include "bgrid/bgm_io.hpp"
#include "bgrid/edge_eval.hpp"
#include "bgrid/gcn/model_io.hpp"
#include "bgrid/gcn/train.hpp"
#include "bgrid/hausdorff.hpp"
#include "bgrid/lbo.hpp"
#include "bgrid/mesh_io.hpp"
#include "bgrid/simplify_loop.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace bgrid;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const std::string& path) {
    if (!fs::exists(path)) throw UsageError("no such file: " + path);
}

std::vector<Vec3> read_points_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open points file: " + path);
    std::vector<Vec3> pts;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        Vec3 p;
        if (ss >> p.x >> p.y >> p.z) pts.push_back(p);
    }
    return pts;
}

std::string feature_csv(const TriMesh& mesh, const VertexSizes& sizes) {
    LboValues lbo = compute_lbo(mesh, sizes);
    gcn::GraphFeatures gf = gcn::extract_features(mesh, sizes, lbo);
    std::string out =
        "v0,v1,edge_lbo,dihedral,inner1,inner2,len_height1,len_height2,global_ratio,normal_angle\n";
    char buf[512];
    for (size_t i = 0; i < gf.edges.size(); ++i) {
        const double* r = gf.edge_features.row(static_cast<int>(i));
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      gf.edges[i].a, gf.edges[i].b, r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7]);
        out += buf;
    }
    return out;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failure: " + path);
}

// Label CSVs from `gcn dataset-gen` / edge_eval export.
std::map<std::pair<int, int>, double> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open labels file: " + path);
    std::map<std::pair<int, int>, double> labels;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() < 5) throw IoError(path + ": malformed label row: " + line);
        labels[{std::stoi(cells[0]), std::stoi(cells[1])}] = std::stod(cells[4]);
    }
    return labels;
}

int cmd_field_init(const std::string& mesh_path, const std::string& out_path, bool uniform, double h0,
                   bool geometric, int nseg, double hmin, double hmax, bool proximity, double beta) {
    require_file(mesh_path);
    if (uniform == geometric) throw UsageError("choose exactly one of --uniform or --geometric");
    TriMesh mesh = load_mesh(mesh_path);
    VertexSizes sizes;
    if (uniform) {
        if (!(h0 > 0.0)) throw UsageError("--uniform requires a positive size");
        sizes = init_uniform(mesh, h0);
    } else {
        GeometricInitConfig cfg;
        cfg.segments_per_circle = nseg;
        cfg.h_min = hmin;
        cfg.h_max = hmax;
        cfg.proximity = proximity;
        std::vector<std::string> warnings;
        sizes = init_geometric(mesh, cfg, &warnings);
        for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    }
    write_bgm(mesh, sizes, beta, out_path);
    std::cerr << "wrote " << out_path << " (" << mesh.vertex_count() << " vertices, " << mesh.face_count()
              << " faces)\n";
    return 0;
}

int cmd_smooth(const std::string& in_path, const std::string& out_path, double beta_flag) {
    require_file(in_path);
    SizingField field = read_bgm(in_path);
    double beta = beta_flag > 0.0 ? beta_flag : field.beta();
    if (beta < 1.0) throw UsageError("beta must be >= 1");
    VertexSizes smoothed = gradient_limit_smooth(field.grid(), field.sizes(), beta);
    write_bgm(field.grid(), smoothed, beta, out_path);
    std::cerr << "wrote " << out_path << "\n";
    return 0;
}

int cmd_simplify(const std::string& in_path, const std::string& out_path, const std::string& method,
                 const std::string& model_path, const std::string& report_path, LoopConfig config) {
    require_file(in_path);
    SizingField initial = read_bgm(in_path);

    SimplifyResult result = [&] {
        if (method == "lbo") {
            config.method = SimplifyMethod::Lbo;
            return run_lbo_abgs(initial, config);
        }
        if (model_path.empty()) throw UsageError("--method gcn requires --model");
        require_file(model_path);
        config.method = SimplifyMethod::Gcn;
        gcn::GcnModel model = gcn::load_model(model_path);
        return run_gcn_abgs(initial, model, config);
    }();

    write_bgm(result.field, out_path);
    if (!report_path.empty()) write_text(report_path, reports_to_csv(result.reports));

    const IterationReport last = result.reports.empty() ? IterationReport{} : result.reports.back();
    std::fprintf(stderr, "%s: %d -> %d faces in %zu iterations, hausdorff %.6g\n", method.c_str(),
                 initial.grid().face_count(), result.field.grid().face_count(), result.reports.size(),
                 last.hausdorff);
    return 0;
}

int cmd_query(const std::string& in_path, const std::vector<double>& point, const std::string& points_path,
              bool bench) {
    require_file(in_path);
    SizingField field = read_bgm(in_path);

    std::vector<Vec3> pts;
    if (!point.empty()) {
        if (point.size() != 3) throw UsageError("--point requires x y z");
        pts.push_back({point[0], point[1], point[2]});
    }
    if (!points_path.empty()) {
        require_file(points_path);
        auto more = read_points_file(points_path);
        pts.insert(pts.end(), more.begin(), more.end());
    }
    if (pts.empty()) throw UsageError("provide --point or --points");

    std::vector<double> out(pts.size());
    auto t0 = std::chrono::steady_clock::now();
    for (size_t i = 0; i < pts.size(); ++i) out[i] = field.query(pts[i]).size;
    double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::string text;
    char buf[64];
    for (double s : out) {
        std::snprintf(buf, sizeof(buf), "%.9g\n", s);
        text += buf;
    }
    std::fputs(text.c_str(), stdout);
    if (bench)
        std::fprintf(stderr, "queried %zu points in %.6f s (mean %.3f us/query)\n", pts.size(), elapsed,
                     1e6 * elapsed / static_cast<double>(pts.size()));
    return 0;
}

int cmd_dataset_gen(const std::vector<std::string>& grids, const std::string& out_dir, int snapshots,
                    LoopConfig config) {
    for (const auto& g : grids) require_file(g);
    fs::create_directories(out_dir);

    size_t rows = 0, files = 0;
    for (const std::string& grid_path : grids) {
        SizingField origin = read_bgm(grid_path);
        std::vector<const SizingField*> one{&origin};
        auto dataset = generate_training_data(one, config, snapshots);
        std::string stem = fs::path(grid_path).stem().string();
        for (const LabeledGrid& snap : dataset) {
            std::string base = out_dir + "/" + stem + "_s" + std::to_string(snap.iteration);
            write_bgm(snap.mesh, snap.sizes, snap.beta, base + ".bgm");
            write_text(base + ".labels.csv", evaluations_to_csv(snap.evals));
            write_text(base + ".features.csv", feature_csv(snap.mesh, snap.sizes));
            rows += snap.evals.size();
            ++files;
        }
    }
    std::cerr << "wrote " << files << " labeled snapshots (" << rows << " edge rows) to " << out_dir << "\n";
    return 0;
}

int cmd_gcn_train(const std::string& data_dir, const std::string& out_path, gcn::TrainConfig config) {
    require_file(data_dir);
    std::vector<std::string> bgms;
    for (const auto& entry : fs::directory_iterator(data_dir))
        if (entry.path().extension() == ".bgm") bgms.push_back(entry.path().string());
    std::sort(bgms.begin(), bgms.end());
    if (bgms.empty()) throw UsageError("no .bgm grids in " + data_dir);

    std::vector<gcn::TrainSample> dataset;
    for (const std::string& bgm : bgms) {
        std::string labels_path = bgm.substr(0, bgm.size() - 4) + ".labels.csv";
        if (!fs::exists(labels_path)) throw UsageError("missing labels for " + bgm);
        SizingField field = read_bgm(bgm);
        auto labels = read_labels_csv(labels_path);

        gcn::TrainSample sample;
        LboValues lbo = compute_lbo(field.grid(), field.sizes());
        sample.features = gcn::extract_features(field.grid(), field.sizes(), lbo);
        sample.labels.reserve(sample.features.edges.size());
        for (const EdgeRef& e : sample.features.edges) {
            auto it = labels.find({e.a, e.b});
            if (it == labels.end())
                throw IoError(labels_path + ": missing edge " + std::to_string(e.a) + "," +
                              std::to_string(e.b));
            sample.labels.push_back(it->second);
        }
        dataset.push_back(std::move(sample));
    }

    gcn::GcnModel model = gcn::train(dataset, config);
    gcn::save_model(model, out_path);
    std::fprintf(stderr, "trained on %zu grids: train mse %.6g, val mse %.6g -> %s\n", dataset.size(),
                 model.final_train_loss, model.final_val_loss, out_path.c_str());
    return 0;
}

int cmd_gcn_predict(const std::string& model_path, const std::string& in_path, const std::string& out_path) {
    require_file(model_path);
    require_file(in_path);
    gcn::GcnModel model = gcn::load_model(model_path);
    SizingField field = read_bgm(in_path);
    gcn::EdgeScores scores = gcn::predict_scores(model, field);

    std::string out = "v0,v1,score\n";
    char buf[128];
    for (size_t i = 0; i < scores.edges.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", scores.edges[i].a, scores.edges[i].b,
                      scores.scores[i]);
        out += buf;
    }
    if (out_path.empty() || out_path == "-")
        std::fputs(out.c_str(), stdout);
    else
        write_text(out_path, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"background grid sizing-field toolkit"};
    app.require_subcommand(1);

    // field-init
    auto* init = app.add_subcommand("field-init", "initialize a sizing field on a surface mesh");
    std::string init_mesh, init_out;
    double init_h0 = 0.0, init_hmin = 0.0, init_hmax = 0.0, init_beta = 1.2;
    int init_nseg = 32;
    bool init_geometric_flag = false, init_proximity = false;
    init->add_option("mesh", init_mesh, "input mesh (.obj/.stl)")->required();
    init->add_option("-o,--output", init_out, "output .bgm")->required();
    auto* uopt = init->add_option("--uniform", init_h0, "uniform size value");
    init->add_flag("--geometric", init_geometric_flag, "curvature-based sizes");
    init->add_option("--nseg", init_nseg, "segments per full circle of curvature");
    init->add_option("--hmin", init_hmin, "minimum size (default 1e-3 * bbox diagonal)");
    init->add_option("--hmax", init_hmax, "maximum size (default 0.5 * bbox diagonal)");
    init->add_flag("--proximity", init_proximity, "enable the nearest-surface proximity term");
    init->add_option("--beta", init_beta, "gradient-limit parameter stored in the field");

    // smooth
    auto* smooth = app.add_subcommand("smooth", "gradient-limit the sizing field");
    std::string smooth_in, smooth_out;
    double smooth_beta = 0.0;
    smooth->add_option("input", smooth_in, "input .bgm")->required();
    smooth->add_option("-o,--output", smooth_out, "output .bgm")->required();
    smooth->add_option("--beta", smooth_beta, "gradient-limit parameter (default: from file)");

    // simplify
    auto* simp = app.add_subcommand("simplify", "adaptive background grid simplification");
    std::string simp_in, simp_out, simp_method = "lbo", simp_model, simp_report;
    LoopConfig loop;
    bool simp_audit = false;
    simp->add_option("input", simp_in, "input .bgm (smoothed)")->required();
    simp->add_option("-o,--output", simp_out, "output .bgm")->required();
    simp->add_option("--method", simp_method, "lbo | gcn")->check(CLI::IsMember({"lbo", "gcn"}));
    simp->add_option("--model", simp_model, "trained model file (gcn method)");
    simp->add_option("--report", simp_report, "per-iteration report CSV");
    simp->add_option("--n-percent", loop.selection.n_percent, "fraction of edges per iteration");
    simp->add_option("--t-size", loop.selection.t_size, "size-ratio threshold");
    simp->add_option("--t-dis", loop.selection.t_dis, "distance threshold (default 1e-3 * bbox diag)");
    simp->add_option("--t-score", loop.t_score, "gcn termination score threshold");
    simp->add_option("--samples-per-face", loop.selection.samples_per_face, "evaluation samples per face");
    simp->add_option("--pre-rank-fraction", loop.pre_rank_fraction,
                     "ranked fraction given accurate evaluation");
    simp->add_option("--max-iterations", loop.max_iterations, "iteration cap");
    simp->add_option("--w-size", loop.selection.w_s, "composite loss weight for size deviation");
    simp->add_option("--w-dis", loop.selection.w_d, "composite loss weight for distance deviation");
    simp->add_flag("--audit", simp_audit, "run a full mesh audit every iteration");

    // query
    auto* query = app.add_subcommand("query", "query sizes at points");
    std::string query_in, query_points;
    std::vector<double> query_point;
    bool query_bench = false;
    query->add_option("input", query_in, "input .bgm")->required();
    query->add_option("--point", query_point, "single query point x y z")->expected(3);
    query->add_option("--points", query_points, "file with one 'x y z' per line");
    query->add_flag("--bench", query_bench, "report mean query latency to stderr");

    // gcn
    auto* gcn_cmd = app.add_subcommand("gcn", "learned edge scorer");
    gcn_cmd->require_subcommand(1);

    auto* dgen = gcn_cmd->add_subcommand("dataset-gen", "label snapshot grids with procedural scores");
    std::vector<std::string> dgen_grids;
    std::string dgen_out;
    int dgen_snapshots = 4;
    LoopConfig dgen_loop;
    dgen->add_option("grids", dgen_grids, "origin .bgm grids")->required();
    dgen->add_option("-o,--output", dgen_out, "output directory")->required();
    dgen->add_option("--snapshots", dgen_snapshots, "snapshots per grid");
    dgen->add_option("--n-percent", dgen_loop.selection.n_percent, "fraction of edges per iteration");
    dgen->add_option("--t-size", dgen_loop.selection.t_size, "size-ratio threshold");
    dgen->add_option("--t-dis", dgen_loop.selection.t_dis, "distance threshold");
    dgen->add_option("--samples-per-face", dgen_loop.selection.samples_per_face, "samples per face");

    auto* train_cmd = gcn_cmd->add_subcommand("train", "train the edge scorer");
    std::string train_data, train_out;
    gcn::TrainConfig tconfig;
    train_cmd->add_option("--data", train_data, "directory of .bgm + .labels.csv pairs")->required();
    train_cmd->add_option("-o,--output", train_out, "output model file")->required();
    train_cmd->add_option("--epochs", tconfig.epochs, "training epochs");
    train_cmd->add_option("--lr", tconfig.lr, "initial learning rate");
    train_cmd->add_option("--lr-step", tconfig.lr_step_epochs, "epochs between x0.5 decays");
    train_cmd->add_option("--seed", tconfig.seed, "rng seed");
    train_cmd->add_option("--dropout", tconfig.dropout, "dropout rate");
    train_cmd->add_option("--val-fraction", tconfig.val_fraction, "held-out fraction");
    train_cmd->add_flag("--all-sigmoid", tconfig.all_sigmoid, "sigmoid activations everywhere");
    train_cmd->add_option("--log-every", tconfig.log_every, "epochs between progress lines");

    auto* predict = gcn_cmd->add_subcommand("predict", "score every edge of a grid");
    std::string pred_model, pred_in, pred_out;
    predict->add_option("model", pred_model, "trained model file")->required();
    predict->add_option("input", pred_in, "input .bgm")->required();
    predict->add_option("-o,--output", pred_out, "output CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*init)
            return cmd_field_init(init_mesh, init_out, uopt->count() > 0, init_h0, init_geometric_flag,
                                  init_nseg, init_hmin, init_hmax, init_proximity, init_beta);
        if (*smooth) return cmd_smooth(smooth_in, smooth_out, smooth_beta);
        if (*simp) {
            loop.audit_every_iteration = simp_audit;
            return cmd_simplify(simp_in, simp_out, simp_method, simp_model, simp_report, loop);
        }
        if (*query) return cmd_query(query_in, query_point, query_points, query_bench);
        if (*dgen) return cmd_dataset_gen(dgen_grids, dgen_out, dgen_snapshots, dgen_loop);
        if (*train_cmd) return cmd_gcn_train(train_data, train_out, tconfig);
        if (*predict) return cmd_gcn_predict(pred_model, pred_in, pred_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
