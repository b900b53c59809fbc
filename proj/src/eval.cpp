#include "mai/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "mai/rng.hpp"

namespace mai::eval {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

tasks::Episode stream_episode(const cfg::RunConfig& c, int index) {
    const int epoch = index / c.task.episodes_per_epoch;
    const int within = index % c.task.episodes_per_epoch;
    std::uint64_t sub = rng::subseed(c.seed, epoch, within, 100);

    tasks::Shape shape = tasks::shape_from_string(c.task.shape);
    if (!c.task.introduce_shape.empty() && c.task.introduce_at >= 0 &&
        index >= c.task.introduce_at) {
        // Alternate the base and the introduced class so both keep being
        // visited after the introduction.
        if ((index - c.task.introduce_at) % 2 == 0)
            shape = tasks::shape_from_string(c.task.introduce_shape);
    }

    tasks::T1Options opt;
    opt.shape = shape;
    opt.steps = c.task.steps;
    opt.jitter = c.task.jitter;
    opt.seed = sub;
    opt.segment_len = c.segment_len();
    opt.open_loop = c.task.open_loops;
    if (shape == tasks::Shape::figure8) opt.center = Eigen::Vector2d(3.0, 0.0);
    tasks::Episode ep = tasks::gen_t1_ex(opt);

    if (c.task.permute_mode == "preserving")
        ep = tasks::permute_episode(ep, rng::subseed(c.seed, epoch, within, 101),
                                    c.segment_len());
    else if (c.task.permute_mode == "breaking")
        ep = tasks::scramble_episode(ep, rng::subseed(c.seed, epoch, within, 102));
    return ep;
}

std::vector<tasks::Episode> build_stream(const cfg::RunConfig& c) {
    std::vector<tasks::Episode> out;
    const int total = c.total_episodes();
    if (c.task.name == "t2") {
        for (int i = 0; i < total; ++i) {
            auto pair = tasks::gen_t2_ex(tasks::shape_from_string(c.task.shape), c.task.steps,
                                         rng::subseed(c.seed, i / c.task.episodes_per_epoch,
                                                      i % c.task.episodes_per_epoch, 100),
                                         rng::subseed(c.seed, 0, 0, 778));
            out.push_back(i % 2 == 0 ? pair.first : pair.second);
        }
        return out;
    }
    for (int i = 0; i < total; ++i) out.push_back(stream_episode(c, i));
    return out;
}

tasks::Episode probe_episode(const cfg::RunConfig& c, std::uint64_t salt, int index) {
    std::uint64_t sub = rng::subseed(c.seed, salt, index, 100);
    tasks::Shape shape = tasks::shape_from_string(c.task.shape);
    if (c.task.name == "t2" || c.task.name == "t3") {
        auto pair = c.task.name == "t2"
                        ? tasks::gen_t2_ex(shape, c.task.steps, sub,
                                           rng::subseed(c.seed, 0, 0, 778))
                        : tasks::gen_t3_shapes(shape, shape, c.task.steps, sub,
                                               rng::subseed(c.seed, 0, 0, 777));
        return pair.first;
    }
    return tasks::gen_t1(shape, c.task.steps, c.task.jitter, false, sub);
}

StreamResult run_stream(const cfg::RunConfig& c) {
    StreamResult result{ExperimentLog{}, engine::Engine(c.engine)};
    result.log.episodes_per_epoch = c.task.episodes_per_epoch;
    result.log.seed = c.seed;
    for (const auto& ep : build_stream(c))
        result.log.reports.push_back(result.engine.run_episode(ep));
    return result;
}

Verdict check_h1(const ExperimentLog& log) {
    Verdict v;
    v.id = "H1";
    if (log.reports.size() < 2) {
        v.detail["reason"] = "need at least two episodes";
        return v;
    }
    bool monotone = true;
    int strict_increases = 0;
    std::vector<int> sizes;
    int prev = 0;
    for (std::size_t i = 0; i < log.reports.size(); ++i) {
        const auto& rep = log.reports[i];
        sizes.push_back(rep.phi_size_after);
        if (i > 0) {
            if (rep.phi_size_after < prev && rep.falsified.empty()) monotone = false;
            if (rep.phi_size_after > prev) ++strict_increases;
        } else if (rep.phi_size_after > 0) {
            ++strict_increases;
        }
        prev = rep.phi_size_after;
    }
    v.pass = monotone && strict_increases >= 1;
    v.statistic = static_cast<double>(strict_increases);
    v.detail["phi_sizes"] = sizes;
    v.detail["monotone_except_falsified"] = monotone;
    return v;
}

Verdict check_h2(const ExperimentLog& log, double gamma_max) {
    Verdict v;
    v.id = "H2";
    // Condition on fixed structure: only episodes that left the library
    // unchanged enter the epoch medians.
    std::vector<double> medians;
    for (int e = 0; e < log.epochs(); ++e) {
        std::vector<double> vals;
        for (int i = e * log.episodes_per_epoch;
             i < std::min<int>((e + 1) * log.episodes_per_epoch, log.reports.size()); ++i) {
            const auto& rep = log.reports[i];
            if (!rep.structure_changed()) vals.push_back(rep.residual_median);
        }
        if (!vals.empty()) medians.push_back(median_of(vals));
    }
    v.detail["epoch_medians"] = medians;
    if (medians.size() < 2) {
        v.detail["reason"] = "need at least two epochs with structure held fixed";
        return v;
    }
    bool degenerate = true;
    for (double m : medians)
        if (m > 1e-15) degenerate = false;
    if (degenerate) {
        v.pass = true;
        v.statistic = 0.0;  // gamma
        v.detail["degenerate"] = true;
        return v;
    }
    // Least squares slope of log medians against the epoch index.
    double n = static_cast<double>(medians.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < medians.size(); ++i) {
        double x = static_cast<double>(i);
        double y = std::log(std::max(medians[i], 1e-15));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double gamma = std::exp(slope);
    v.statistic = gamma;
    v.pass = slope < 0 && gamma <= gamma_max;
    v.detail["slope"] = slope;
    v.detail["gamma"] = gamma;
    return v;
}

Verdict check_h3(const engine::Engine& trained, const tasks::Episode& episode,
                 int permutations, double epsilon, double vr_scale, int segment_len) {
    Verdict v;
    v.id = "H3";

    auto class_set_of = [](const engine::EpisodeReport& rep) {
        std::set<int> s(rep.matched.begin(), rep.matched.end());
        s.insert(rep.admitted.begin(), rep.admitted.end());
        return s;
    };
    auto latent_diagram = [&](const tasks::Episode& ep) {
        engine::Engine probe = trained;
        auto tr = probe.encoder_for(ep).encode(ep);
        return ph::reduce(ph::build_vr(tr.states, 2, vr_scale));
    };

    engine::Engine base = trained;
    engine::EpisodeReport base_rep = base.run_episode(episode);
    std::set<int> base_classes = class_set_of(base_rep);
    ph::PersistenceDiagram base_diagram = latent_diagram(episode);

    int same_class = 0;
    double worst_distance = 0.0;
    std::vector<double> distances;
    for (int p = 0; p < permutations; ++p) {
        tasks::Episode permuted =
            tasks::permute_episode(episode, rng::subseed(episode.permutation_seed, p, 0, 103),
                                   segment_len);
        engine::Engine probe = trained;
        engine::EpisodeReport rep = probe.run_episode(permuted);
        if (class_set_of(rep) == base_classes) ++same_class;
        distances.push_back(ph::bottleneck(base_diagram, latent_diagram(permuted), 1));
        worst_distance = std::max(worst_distance, distances.back());
    }
    v.statistic = worst_distance;
    v.pass = same_class == permutations && worst_distance <= epsilon;
    v.detail["permutations"] = permutations;
    v.detail["same_class"] = same_class;
    v.detail["bottleneck_distances"] = distances;
    v.detail["worst_bottleneck"] = worst_distance;
    v.detail["epsilon"] = epsilon;
    return v;
}

Verdict check_h4(const ExperimentLog& log) {
    Verdict v;
    v.id = "H4";
    std::vector<double> epoch_means;
    for (int e = 0; e < log.epochs(); ++e) {
        std::vector<double> vals;
        for (int i = e * log.episodes_per_epoch;
             i < std::min<int>((e + 1) * log.episodes_per_epoch, log.reports.size()); ++i)
            vals.push_back(log.reports[i].window_coherence);
        if (!vals.empty()) epoch_means.push_back(mean_of(vals));
    }
    v.detail["epoch_means"] = epoch_means;
    if (epoch_means.size() < 2) {
        v.detail["reason"] = "need at least two epochs";
        return v;
    }
    v.statistic = epoch_means.back() - epoch_means.front();
    v.pass = epoch_means.back() >= epoch_means.front() - 1e-9;
    return v;
}

Verdict check_h5(const engine::Engine& trained, const std::vector<tasks::Episode>& held_out,
                 double ratio_max) {
    Verdict v;
    v.id = "H5";
    std::vector<double> ratios;
    int unreachable = 0;
    for (const auto& ep : held_out) {
        engine::Engine warm = trained;
        engine::Engine cold = trained;
        auto with_mem = warm.steps_to_target(ep, true);
        auto scratch = cold.steps_to_target(ep, false);
        if (!with_mem.reached || !scratch.reached) ++unreachable;
        double denom = std::max(1, scratch.steps);
        ratios.push_back(static_cast<double>(with_mem.steps) / denom);
    }
    v.statistic = median_of(ratios);
    v.pass = !ratios.empty() && v.statistic <= ratio_max;
    v.detail["ratios"] = ratios;
    v.detail["unreachable"] = unreachable;
    v.detail["ratio_max"] = ratio_max;
    return v;
}

Ablation ablation_from_string(const std::string& id) {
    if (id == "A1") return Ablation::A1;
    if (id == "A2") return Ablation::A2;
    if (id == "A3") return Ablation::A3;
    if (id == "A4") return Ablation::A4;
    if (id == "A5") return Ablation::A5;
    fail(ErrorCode::unknown_ablation, "unknown ablation id: " + id);
}

std::string to_string(Ablation a) {
    switch (a) {
        case Ablation::A1: return "A1";
        case Ablation::A2: return "A2";
        case Ablation::A3: return "A3";
        case Ablation::A4: return "A4";
        case Ablation::A5: return "A5";
    }
    return "?";
}

AblationArm make_ablation_arm(Ablation a, const cfg::RunConfig& base) {
    AblationArm arm{base, ""};
    arm.config.ablation = to_string(a);
    switch (a) {
        case Ablation::A1:
            arm.config.task.open_loops = true;
            arm.changed_field = "task.open_loops";
            break;
        case Ablation::A2:
            arm.config.engine.tau = 0.0;
            arm.changed_field = "engine.tau";
            break;
        case Ablation::A3:
            arm.config.engine.retrieval_enabled = false;
            arm.changed_field = "engine.retrieval_enabled";
            break;
        case Ablation::A4:
            arm.config.task.permute_mode = "breaking";
            arm.changed_field = "task.permute_mode";
            break;
        case Ablation::A5:
            arm.config.engine.eta_fast = 0.0;
            arm.changed_field = "engine.eta_fast";
            break;
    }
    return arm;
}

namespace {

nlohmann::json summarize(const ExperimentLog& log) {
    nlohmann::json j;
    std::vector<int> phi;
    std::vector<double> medians, boundary;
    int admissions = 0;
    for (const auto& rep : log.reports) {
        phi.push_back(rep.phi_size_after);
        medians.push_back(rep.residual_median);
        boundary.push_back(rep.boundary_norm);
        admissions += static_cast<int>(rep.admitted.size());
    }
    j["phi_sizes"] = phi;
    j["residual_medians"] = medians;
    j["boundary_norms"] = boundary;
    j["total_admissions"] = admissions;
    j["final_phi"] = phi.empty() ? 0 : phi.back();
    return j;
}

}  // namespace

AblationOutcome run_ablation(Ablation a, const cfg::RunConfig& base) {
    AblationOutcome out;
    AblationArm arm = make_ablation_arm(a, base);
    out.changed_field = arm.changed_field;

    StreamResult base_run = run_stream(base);
    out.baseline = summarize(base_run.log);

    Verdict v;
    v.id = to_string(a);

    switch (a) {
        case Ablation::A1: {
            StreamResult arm_run = run_stream(arm.config);
            out.arm = summarize(arm_run.log);
            int admissions = out.arm["total_admissions"].get<int>();
            double min_r = ph::kInf;
            for (const auto& rep : arm_run.log.reports)
                min_r = std::min(min_r, rep.boundary_norm);
            v.pass = admissions == 0 && min_r > 0;
            v.statistic = min_r;
            v.detail["admissions"] = admissions;
            v.detail["min_boundary_norm"] = min_r;
            break;
        }
        case Ablation::A2: {
            StreamResult arm_run = run_stream(arm.config);
            out.arm = summarize(arm_run.log);
            double base_phi = std::max(1, out.baseline["final_phi"].get<int>());
            double arm_phi = out.arm["final_phi"].get<int>();
            v.statistic = arm_phi / base_phi;
            v.pass = v.statistic >= base.checks.a2_phi_factor;
            v.detail["baseline_phi"] = out.baseline["final_phi"];
            v.detail["arm_phi"] = out.arm["final_phi"];
            v.detail["factor"] = v.statistic;
            v.detail["required_factor"] = base.checks.a2_phi_factor;
            break;
        }
        case Ablation::A3: {
            StreamResult arm_run = run_stream(arm.config);
            out.arm = summarize(arm_run.log);
            // Held-out ratio evaluated inside the retrieval-free arm.
            std::vector<tasks::Episode> held;
            for (int i = 0; i < base.checks.h5_held_out; ++i)
                held.push_back(probe_episode(base, 999, i));
            Verdict h5 = check_h5(arm_run.engine, held, base.checks.h5_ratio_max);
            double base_mean = mean_of(out.baseline["residual_medians"].get<std::vector<double>>());
            double arm_mean = mean_of(out.arm["residual_medians"].get<std::vector<double>>());
            v.statistic = h5.statistic;
            v.pass = std::abs(h5.statistic - 1.0) <= 0.1 && arm_mean >= base_mean;
            v.detail["steps_ratio"] = h5.statistic;
            v.detail["baseline_mean_residual"] = base_mean;
            v.detail["arm_mean_residual"] = arm_mean;
            break;
        }
        case Ablation::A4: {
            // Scrambles are judged against the trained baseline engine.
            std::set<int> clean_classes;
            for (const auto& rep : base_run.log.reports) {
                for (int id : rep.matched) clean_classes.insert(id);
                for (int id : rep.admitted) clean_classes.insert(id);
            }
            int changed = 0;
            const int trials = base.checks.a4_trials;
            for (int i = 0; i < trials; ++i) {
                tasks::Episode clean = probe_episode(base, 998, i);
                tasks::Episode scrambled =
                    tasks::scramble_episode(clean, rng::subseed(base.seed, 997, i, 106));
                engine::Engine probe = base_run.engine;
                engine::EpisodeReport rep = probe.run_episode(scrambled);
                bool closure_ok = rep.boundary_norm == 0.0;
                bool same_class = closure_ok && !rep.matched.empty() && rep.admitted.empty() &&
                                  clean_classes.count(rep.matched.front()) > 0;
                if (!same_class) ++changed;
            }
            out.arm = {{"trials", trials}, {"changed_or_failed", changed}};
            v.statistic = trials > 0 ? static_cast<double>(changed) / trials : 0.0;
            v.pass = v.statistic >= base.checks.a4_fraction;
            v.detail["fraction_changed"] = v.statistic;
            v.detail["required_fraction"] = base.checks.a4_fraction;
            break;
        }
        case Ablation::A5: {
            StreamResult arm_run = run_stream(arm.config);
            out.arm = summarize(arm_run.log);
            Verdict h2 = check_h2(arm_run.log, base.checks.h2_gamma_max);
            v.statistic = h2.statistic;
            v.pass = !h2.pass;  // freezing the fast path must break the contraction
            v.detail["arm_h2"] = {{"pass", h2.pass}, {"gamma", h2.statistic}};
            break;
        }
    }
    out.verdict = v;
    return out;
}

}  // namespace mai::eval
