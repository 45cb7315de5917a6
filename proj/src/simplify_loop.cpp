#include "bgrid/simplify_loop.hpp"

#include "bgrid/geometry.hpp"
#include "bgrid/hausdorff.hpp"
#include "bgrid/lbo.hpp"
#include "bgrid/remesh.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <set>

namespace bgrid {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct LoopState {
    TriMesh mesh;
    VertexSizes sizes;
    const SizingField* target;
    LoopConfig config;
};

// Candidates for this iteration, already validity- and 1-ring-filtered, in
// collapse order.
std::vector<EdgeEvaluation> lbo_candidates(LoopState& st) {
    EdgeRank rank = rank_edges(st.mesh, st.sizes);
    const size_t take = static_cast<size_t>(
        std::ceil(st.config.pre_rank_fraction * static_cast<double>(rank.edges.size())));
    std::vector<EdgeEvaluation> evals;
    evals.reserve(take);
    for (size_t i = 0; i < rank.edges.size() && i < take; ++i)
        evals.push_back(evaluate_edge(st.mesh, st.sizes, *st.target, rank.edges[i], st.config.selection));
    return select_candidates(std::move(evals), st.config.selection, st.mesh);
}

std::vector<EdgeEvaluation> gcn_candidates(LoopState& st, const gcn::GcnModel& model, bool& threshold_stop) {
    threshold_stop = false;
    gcn::EdgeScores scored = gcn::predict_scores(model, st.mesh, st.sizes);

    std::vector<size_t> order(scored.edges.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
        if (scored.scores[x] != scored.scores[y]) return scored.scores[x] < scored.scores[y];
        return scored.edges[x] < scored.edges[y];
    });

    const size_t cap = static_cast<size_t>(
        std::ceil(st.config.selection.n_percent * static_cast<double>(scored.edges.size())));

    std::vector<std::pair<EdgeRef, double>> valid;
    for (size_t i = 0; i < order.size() && i < cap; ++i) {
        const EdgeRef& e = scored.edges[order[i]];
        if (resolve_collapse(st.mesh, e, st.config.selection.colinear_tol))
            valid.emplace_back(e, scored.scores[order[i]]);
    }
    if (valid.empty()) return {};
    if (valid.front().second > st.config.t_score) {
        threshold_stop = true;
        return {};
    }

    std::vector<EdgeEvaluation> selected;
    std::set<int> used;
    for (const auto& [e, score] : valid) {
        if (used.count(e.a) || used.count(e.b)) continue;
        used.insert(e.a);
        used.insert(e.b);
        EdgeEvaluation ev;
        ev.edge = e;
        ev.score = score;
        ev.collapsible = true;
        ev.topology_ok = true;
        selected.push_back(ev);
    }
    return selected;
}

SimplifyResult run_loop(const SizingField& initial, const LoopConfig& raw_config,
                        const gcn::GcnModel* model) {
    LoopConfig config = raw_config;
    config.selection = raw_config.selection.resolved(initial.grid().bounding_box());
    if (!(config.pre_rank_fraction > 0.0) || config.pre_rank_fraction > 1.0)
        throw MeshError("pre_rank_fraction must be in (0,1]");
    if (!(config.t_score > 0.0) || config.t_score >= 1.0) throw MeshError("t_score must be in (0,1)");

    const std::uint64_t target_hash = initial.grid().content_hash();

    LoopState st{initial.grid(), initial.sizes(), &initial, config};
    std::vector<IterationReport> reports;

    if (config.snapshot_hook) config.snapshot_hook(0, st.mesh, st.sizes);

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        IterationReport report;
        report.iteration = iter;

        auto t_simplify = Clock::now();
        bool threshold_stop = false;
        std::vector<EdgeEvaluation> candidates =
            model ? gcn_candidates(st, *model, threshold_stop) : lbo_candidates(st);

        // Collapses in score order; candidates invalidated by earlier
        // collapses in the same batch are re-checked and skipped.
        std::set<int> region;
        int collapsed = 0;
        for (const EdgeEvaluation& ev : candidates) {
            auto placement = resolve_collapse(st.mesh, ev.edge, config.selection.colinear_tol);
            if (!placement) continue;
            CollapseResult cr;
            if (st.mesh.collapse(ev.edge, *placement, &cr) != CollapseStatus::Ok) continue;
            ++collapsed;
            for (int f : cr.ring_faces) region.insert(f);
        }
        report.collapsed = collapsed;
        report.time_simplify_s = seconds_since(t_simplify);

        auto t_smooth = Clock::now();
        std::set<int> moved_region;
        if (collapsed > 0) {
            local_remesh(st.mesh, region, *st.target, config.remesh_iterations, config.lambda_smooth);
            // Region faces may have been rewritten by flips; refresh.
            for (int f : region)
                if (f < st.mesh.face_slots() && st.mesh.face_alive(f)) moved_region.insert(f);
        }
        report.time_smooth_s = seconds_since(t_smooth);

        auto t_query = Clock::now();
        if (collapsed > 0) {
            std::set<int> touched;
            for (int f : moved_region)
                for (int v : st.mesh.face(f)) touched.insert(v);
            for (int v : touched) st.sizes[v] = st.target->query(st.mesh.position(v)).size;
        }

        report.vertices = st.mesh.vertex_count();
        report.edges = st.mesh.edge_count();
        report.faces = st.mesh.face_count();
        if (config.compute_metrics) {
            SizingField snapshot(st.mesh, st.sizes, initial.beta());
            report.hausdorff = hausdorff_distance(snapshot.grid(), st.target->grid(),
                                                  config.report_samples_per_face);
            report.element_proxy = element_count_proxy(snapshot, *st.target, config.report_samples_per_face);
        }
        report.time_query_s = seconds_since(t_query);

        if (config.audit_every_iteration) {
            auto problems = st.mesh.audit();
            if (!problems.empty())
                throw MeshError("loop audit failure at iteration " + std::to_string(iter) + ": " +
                                problems.front());
        }

        reports.push_back(report);
        if (config.snapshot_hook && collapsed > 0) config.snapshot_hook(iter, st.mesh, st.sizes);
        if (collapsed == 0 || threshold_stop) break;
    }

    if (initial.grid().content_hash() != target_hash)
        throw MeshError("target grid was modified during the loop");

    return SimplifyResult{SizingField(st.mesh, st.sizes, initial.beta()), std::move(reports)};
}

}  // namespace

SimplifyResult run_lbo_abgs(const SizingField& initial, const LoopConfig& config) {
    return run_loop(initial, config, nullptr);
}

SimplifyResult run_gcn_abgs(const SizingField& initial, const gcn::GcnModel& model, const LoopConfig& config) {
    if (!model.trained) throw MeshError("gcn simplification requires a trained model");
    return run_loop(initial, config, &model);
}

double element_count_proxy(const SizingField& field, const SizingField& target, int samples_per_face) {
    const auto lattice = barycentric_lattice(lattice_level_for(samples_per_face));
    const TriMesh& tg = target.grid();
    double total = 0.0;
    for (int f = 0; f < tg.face_slots(); ++f) {
        if (!tg.face_alive(f)) continue;
        const auto& t = tg.face(f);
        const Vec3 &a = tg.position(t[0]), &b = tg.position(t[1]), &c = tg.position(t[2]);
        double acc = 0.0;
        for (const auto& l : lattice) {
            Vec3 p = a * l[0] + b * l[1] + c * l[2];
            double h = field.query(p).size;
            acc += 1.0 / (h * h);
        }
        total += tg.face_area(f) * acc / static_cast<double>(lattice.size());
    }
    return total;
}

std::string reports_to_csv(const std::vector<IterationReport>& reports) {
    std::string out =
        "iteration,collapsed,vertices,edges,faces,hausdorff,element_proxy,"
        "time_simplify_s,time_smooth_s,time_query_s\n";
    char buf[320];
    for (const IterationReport& r : reports) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%d,%.9g,%.9g,%.6f,%.6f,%.6f\n", r.iteration,
                      r.collapsed, r.vertices, r.edges, r.faces, r.hausdorff, r.element_proxy,
                      r.time_simplify_s, r.time_smooth_s, r.time_query_s);
        out += buf;
    }
    return out;
}

std::vector<LabeledGrid> generate_training_data(const std::vector<const SizingField*>& origins,
                                                const LoopConfig& config, int snapshots_per_grid) {
    std::vector<LabeledGrid> dataset;
    for (const SizingField* origin : origins) {
        std::vector<std::pair<int, std::pair<TriMesh, VertexSizes>>> snaps;
        LoopConfig cfg = config;
        cfg.compute_metrics = false;
        cfg.snapshot_hook = [&](int iter, const TriMesh& mesh, const VertexSizes& sizes) {
            if (static_cast<int>(snaps.size()) >= snapshots_per_grid) return;
            // Compact so snapshot edges, labels and serialized grids agree on
            // vertex ids.
            TriMesh compacted = mesh;
            std::vector<int> vmap;
            compacted.compact(&vmap);
            VertexSizes remapped(compacted.vertex_slots(), 0.0);
            for (size_t old = 0; old < vmap.size(); ++old)
                if (vmap[old] >= 0) remapped[vmap[old]] = sizes[old];
            snaps.push_back({iter, {std::move(compacted), std::move(remapped)}});
        };
        run_lbo_abgs(*origin, cfg);

        SelectionConfig sel = config.selection.resolved(origin->grid().bounding_box());
        for (auto& [iter, snap] : snaps) {
            LabeledGrid g;
            g.mesh = std::move(snap.first);
            g.sizes = std::move(snap.second);
            g.beta = origin->beta();
            g.iteration = iter;
            for (const EdgeRef& e : g.mesh.edges())
                g.evals.push_back(evaluate_edge(g.mesh, g.sizes, *origin, e, sel));
            dataset.push_back(std::move(g));
        }
    }
    return dataset;
}

}  // namespace bgrid
