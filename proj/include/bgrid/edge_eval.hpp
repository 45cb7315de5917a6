#pragma once

#include "bgrid/mesh.hpp"
#include "bgrid/sizing_field.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bgrid {

struct EdgeEvaluation {
    EdgeRef edge;
    double delta_s = 1.0;     // max size ratio across samples, >= 1
    double delta_d = 0.0;     // max projection distance across samples
    double score = 1.0;       // composite loss in [0,1]
    bool collapsible = false;
    bool topology_ok = false;
    CollapsePlacement placement = CollapsePlacement::Midpoint;
};

struct SelectionConfig {
    double n_percent = 0.10;       // fraction of edges taken per iteration
    double t_size = 1.2;           // size-ratio threshold (> 1)
    double t_dis = 0.0;            // distance threshold; <= 0 resolves to 1e-3 * bbox diag
    double w_s = 0.5, w_d = 0.5;   // composite-loss weights
    int samples_per_face = 6;
    double lambda_margin = 0.1;    // interior lattice margin
    double colinear_tol = 0.0;     // boundary colinearity; <= 0 resolves to 1e-9 * bbox diag

    void validate() const;
    // Fills the scale-dependent defaults from the target surface.
    SelectionConfig resolved(const Aabb& bbox) const;
};

// Placement policy: interior edges collapse to the midpoint, mixed
// interior/boundary edges onto the boundary endpoint, boundary edges onto an
// endpoint when the removed vertex is colinear with the remaining boundary.
// Returns nullopt when no placement yields a valid collapse.
std::optional<CollapsePlacement> resolve_collapse(const TriMesh& mesh, const EdgeRef& e, double colinear_tol);

// Simulates the collapse on a scratch patch and measures size deviation and
// geometric deviation against the target field at interior lattice samples of
// the post-collapse 1-ring.
EdgeEvaluation evaluate_edge(const TriMesh& mesh, const VertexSizes& sizes, const SizingField& target,
                             const EdgeRef& e, const SelectionConfig& config);

// Threshold filter, ascending-score ordering, top-n% cut, then the greedy
// 1-ring filter. The returned evaluations are in acceptance order; an empty
// result is the loop termination signal.
std::vector<EdgeEvaluation> select_candidates(std::vector<EdgeEvaluation> evals, const SelectionConfig& config,
                                              const TriMesh& mesh);

// Label CSV (v0,v1,delta_s,delta_d,score,collapsible); doubles keep full
// precision.
std::string evaluations_to_csv(const std::vector<EdgeEvaluation>& evals);

}  // namespace bgrid
