#pragma once

#include "bgrid/edge_eval.hpp"
#include "bgrid/gcn/model.hpp"
#include "bgrid/sizing_field.hpp"

#include <functional>
#include <string>
#include <vector>

namespace bgrid {

enum class SimplifyMethod { Lbo, Gcn };

struct LoopConfig {
    SimplifyMethod method = SimplifyMethod::Lbo;
    SelectionConfig selection;
    double t_score = 0.5;              // GCN termination threshold
    int max_iterations = 100;
    double pre_rank_fraction = 0.25;   // share of ranked edges given accurate evaluation
    int remesh_iterations = 3;
    double lambda_smooth = 0.5;
    int report_samples_per_face = 6;
    bool compute_metrics = true;       // per-iteration Hausdorff + query-cost proxy
    bool audit_every_iteration = false;
    // Called with the initial state and after every iteration; used for
    // training-data capture.
    std::function<void(int iteration, const TriMesh&, const VertexSizes&)> snapshot_hook;
};

struct IterationReport {
    int iteration = 0;
    int collapsed = 0;
    int vertices = 0, edges = 0, faces = 0;
    double hausdorff = 0.0;
    double element_proxy = 0.0;        // integral of 1/H^2 over the target surface
    double time_simplify_s = 0.0;      // ranking/scoring + evaluation + collapses
    double time_smooth_s = 0.0;        // local remeshing
    double time_query_s = 0.0;         // size reprojection + metric queries
};

struct SimplifyResult {
    SizingField field;
    std::vector<IterationReport> reports;
};

// Procedural variant: LBO pre-ranking, accurate evaluation of the smoothest
// fraction, thresholded selection, collapse + local remesh + size reprojection
// onto the immutable target.
SimplifyResult run_lbo_abgs(const SizingField& initial, const LoopConfig& config);

// Learned variant: one scoring pass per iteration, n% smallest scores,
// topological validity + 1-ring filter, termination on T_score.
SimplifyResult run_gcn_abgs(const SizingField& initial, const gcn::GcnModel& model, const LoopConfig& config);

// Downstream element-count proxy: area integral of 1/H(x)^2 over the target
// surface with H queried from `field`.
double element_count_proxy(const SizingField& field, const SizingField& target, int samples_per_face = 6);

std::string reports_to_csv(const std::vector<IterationReport>& reports);

// Snapshots of an LBO-ABGS run with every edge procedurally labeled against
// the snapshot's own unsimplified origin.
struct LabeledGrid {
    TriMesh mesh;
    VertexSizes sizes;
    double beta = 1.0;
    int iteration = 0;
    std::vector<EdgeEvaluation> evals;  // canonical edge order
};

std::vector<LabeledGrid> generate_training_data(const std::vector<const SizingField*>& origins,
                                                const LoopConfig& config, int snapshots_per_grid);

}  // namespace bgrid
