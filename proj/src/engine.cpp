#include "mai/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mai::engine {

namespace {

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

void EngineConfig::validate() const {
    if (tau < 0) fail(ErrorCode::config, "tau must be >= 0");
    if (tau_mode != "fixed" && tau_mode != "elbow")
        fail(ErrorCode::config, "tau_mode must be 'fixed' or 'elbow'");
    if (k < 1) fail(ErrorCode::config, "k must be >= 1");
    if (eta_fast < 0) fail(ErrorCode::config, "eta_fast must be >= 0");
    if (eta_slow <= 0) fail(ErrorCode::config, "eta_slow must be > 0");
    if (bin < 1) fail(ErrorCode::config, "bin must be >= 1");
    if (knn < 0) fail(ErrorCode::config, "knn must be >= 0");
    if (latent_dim < 1) fail(ErrorCode::config, "latent_dim must be >= 1");
    if (lipschitz <= 0) fail(ErrorCode::config, "lipschitz must be > 0");
    if (leak < 0 || leak >= 1) fail(ErrorCode::config, "leak must lie in [0, 1)");
    if (landmark_cap < 4) fail(ErrorCode::config, "landmark_cap must be >= 4");
    if (landmark_gate <= 0) fail(ErrorCode::config, "landmark_gate must be > 0");
    if (fill_factor <= 0) fail(ErrorCode::config, "fill_factor must be > 0");
    if (residual_target <= 0) fail(ErrorCode::config, "residual_target must be > 0");
    if (residual_window < 1) fail(ErrorCode::config, "residual_window must be >= 1");
    if (entropy_bins < 2) fail(ErrorCode::config, "entropy_bins must be >= 2");
    if (entropy_range <= 0) fail(ErrorCode::config, "entropy_range must be > 0");
    if (decoder_blend < 0 || decoder_blend >= 1)
        fail(ErrorCode::config, "decoder_blend must lie in [0, 1)");
}

Scaffold Scaffold::neutral(int dim) {
    Scaffold s;
    s.gain = Eigen::VectorXd::Ones(dim);
    s.offset = Eigen::VectorXd::Zero(dim);
    return s;
}

bool Scaffold::is_neutral() const {
    return (gain.array() == 1.0).all() && (offset.array() == 0.0).all();
}

Eigen::VectorXd Scaffold::apply(const Eigen::VectorXd& u) const {
    return gain.cwiseProduct(u) + offset;
}

void Scaffold::clip(double bound) {
    Eigen::VectorXd dev(gain.size() + offset.size());
    dev << (gain.array() - 1.0).matrix(), offset;
    double n = dev.norm();
    if (n > bound) {
        double s = bound / n;
        gain = Eigen::VectorXd::Ones(gain.size()) + (gain - Eigen::VectorXd::Ones(gain.size())) * s;
        offset *= s;
    }
}

LoopTemplate::LoopTemplate(std::vector<Eigen::VectorXd> points, int dense_points)
    : points_(std::move(points)) {
    if (points_.size() < 3) return;
    std::vector<Eigen::VectorXd> poly = points_;
    if ((poly.front() - poly.back()).norm() > 1e-12) poly.push_back(poly.front());

    std::vector<double> seg_len;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        double l = (poly[i + 1] - poly[i]).norm();
        seg_len.push_back(l);
        perimeter_ += l;
    }
    if (perimeter_ < 1e-12) {
        perimeter_ = 0.0;
        return;
    }
    // Equal arc-length resampling of the closed polyline.
    dense_.reserve(dense_points);
    double spacing = perimeter_ / dense_points;
    std::size_t seg = 0;
    double seg_start = 0.0;
    for (int i = 0; i < dense_points; ++i) {
        double target = i * spacing;
        while (seg + 1 < seg_len.size() && seg_start + seg_len[seg] < target) {
            seg_start += seg_len[seg];
            ++seg;
        }
        double frac = seg_len[seg] > 1e-12 ? (target - seg_start) / seg_len[seg] : 0.0;
        frac = std::clamp(frac, 0.0, 1.0);
        dense_.push_back(poly[seg] + frac * (poly[seg + 1] - poly[seg]));
    }
}

double LoopTemplate::mean_segment() const {
    if (points_.size() < 2) return 0.0;
    std::size_t segs = points_.size() - 1;
    return perimeter_ > 0 ? perimeter_ / static_cast<double>(segs) : 0.0;
}

int LoopTemplate::nearest_phase(const Eigen::VectorXd& z) const {
    int best = 0;
    double best_d = (z - dense_[0]).norm();
    for (std::size_t i = 1; i < dense_.size(); ++i) {
        double d = (z - dense_[i]).norm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

Eigen::VectorXd LoopTemplate::advance_from(const Eigen::VectorXd& z, double arc) const {
    const int n = static_cast<int>(dense_.size());
    double spacing = perimeter_ / n;
    double pos = nearest_phase(z) * spacing + arc;
    pos = std::fmod(pos, perimeter_);
    if (pos < 0) pos += perimeter_;
    int j = static_cast<int>(pos / spacing) % n;
    double frac = pos / spacing - std::floor(pos / spacing);
    return dense_[j] + frac * (dense_[(j + 1) % n] - dense_[j]);
}

LoopTemplate fit_template(const std::vector<Eigen::VectorXd>& states, int bin) {
    if (states.empty()) return LoopTemplate();
    std::vector<Eigen::VectorXd> centroids;
    const int T = static_cast<int>(states.size());
    for (int start = 0; start < T; start += bin) {
        int end = std::min(T, start + bin);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(states[0].size());
        for (int t = start; t < end; ++t) c += states[t];
        centroids.push_back(c / static_cast<double>(end - start));
    }
    return LoopTemplate(std::move(centroids));
}

double residual_boundary_norm(const tasks::StateGraph& g) {
    std::map<int, int> degree;
    for (const auto& [a, b] : g.chain_edges) {
        degree[a] ^= 1;
        degree[b] ^= 1;
    }
    int odd = 0;
    for (const auto& [v, parity] : degree) odd += parity;
    return static_cast<double>(odd);
}

double entropy_proxy(const std::vector<EpisodeReport>& history, const EngineConfig& cfg) {
    std::map<int, std::vector<double>> by_class;
    for (const auto& rep : history) {
        int cls = rep.retrieval.empty() ? -1 : rep.retrieval.front().first;
        for (double sq : rep.residual_series) by_class[cls].push_back(std::sqrt(sq));
    }
    if (by_class.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [cls, mags] : by_class) {
        std::vector<double> hist(cfg.entropy_bins, 0.0);
        for (double m : mags) {
            int b = static_cast<int>(m / cfg.entropy_range * cfg.entropy_bins);
            b = std::clamp(b, 0, cfg.entropy_bins - 1);
            hist[b] += 1.0;
        }
        double n = static_cast<double>(mags.size());
        double h = 0.0;
        for (double c : hist)
            if (c > 0) h -= (c / n) * std::log2(c / n);
        total += h;
    }
    return total / static_cast<double>(by_class.size());
}

Engine::Engine(EngineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    state_.decoder_w = 0.9 * Eigen::MatrixXd::Identity(cfg_.latent_dim, cfg_.latent_dim);
    state_.decoder_b = Eigen::VectorXd::Zero(cfg_.latent_dim);
    state_.library = mem::CycleLibrary(cfg_.landmark_cap, cfg_.landmark_gate);
    state_.scaffold = Scaffold::neutral(cfg_.latent_dim);
}

const tasks::Encoder& Engine::encoder_for(const tasks::Episode& ep) {
    auto it = state_.encoders.find(ep.modality);
    if (it != state_.encoders.end()) {
        if (it->second.obs_dim() != ep.obs_dim())
            fail(ErrorCode::dimension_mismatch, "episode does not match the modality encoder");
        return it->second;
    }
    tasks::Encoder enc =
        ep.obs_dim() == cfg_.latent_dim
            ? tasks::Encoder::identity(cfg_.latent_dim, cfg_.leak, cfg_.lipschitz)
            : tasks::Encoder::fit_pca(ep.observations, cfg_.latent_dim, cfg_.leak,
                                      cfg_.lipschitz);
    return state_.encoders.emplace(ep.modality, std::move(enc)).first->second;
}

const LoopTemplate& Engine::template_for(const mem::CycleRecord& rec) const {
    auto it = template_cache_.find(rec.class_id);
    if (it == template_cache_.end())
        it = template_cache_.emplace(rec.class_id, LoopTemplate(rec.path)).first;
    return it->second;
}

Eigen::VectorXd Engine::raw_prediction(const tasks::LatentTrajectory& tr, int t,
                                       const LoopTemplate& tmpl) const {
    Eigen::VectorXd decoded = state_.decoder_w * tr.states[t] + state_.decoder_b;
    Eigen::VectorXd u;
    if (tmpl.valid()) {
        double arc = t > 0 ? (tr.states[t] - tr.states[t - 1]).norm()
                           : tmpl.perimeter() / std::max(1, tr.steps() - 1);
        arc = std::min(arc, tmpl.perimeter() / 4.0);
        // The template is the structural prior; the slow readout rides on
        // top and is what consolidation actually improves across episodes.
        u = (1.0 - cfg_.decoder_blend) * tmpl.advance_from(tr.states[t], arc) +
            cfg_.decoder_blend * decoded;
    } else {
        u = decoded;
    }
    return u;
}

Engine::PassResult Engine::adaptation_pass(const tasks::LatentTrajectory& tr,
                                           const LoopTemplate& tmpl, bool adapt) const {
    PassResult out;
    out.scaffold = Scaffold::neutral(cfg_.latent_dim);
    const int T = tr.steps();
    if (T < 2) return out;

    std::vector<double> window;
    for (int t = 0; t + 1 < T; ++t) {
        Eigen::VectorXd raw = raw_prediction(tr, t, tmpl);
        Eigen::VectorXd pred = out.scaffold.apply(raw);
        Eigen::VectorXd err = tr.states[t + 1] - pred;
        double norm = err.norm();
        out.residual_sq.push_back(norm * norm);
        out.scaffold.residual_history.push_back(norm);

        window.push_back(norm);
        if (static_cast<int>(window.size()) > cfg_.residual_window)
            window.erase(window.begin());
        if (out.first_target_step < 0 &&
            static_cast<int>(window.size()) == cfg_.residual_window &&
            median_of(window) <= cfg_.residual_target)
            out.first_target_step = t;

        if (adapt && cfg_.eta_fast > 0) {
            // Normalized LMS keeps the gain update stable at any
            // coordinate scale.
            Eigen::VectorXd scale =
                (raw.array().square() + 1.0).matrix();
            out.scaffold.gain += cfg_.eta_fast * err.cwiseProduct(raw).cwiseQuotient(scale);
            out.scaffold.offset += cfg_.eta_fast * err.cwiseQuotient(scale);
            out.scaffold.clip(cfg_.scaffold_bound);
        }
    }
    return out;
}

Eigen::VectorXd Engine::bootstrap_forward(const Eigen::VectorXd& z,
                                          const Eigen::VectorXd* z_prev,
                                          const mem::CycleRecord& rec) const {
    const LoopTemplate& tmpl = template_for(rec);
    if (!tmpl.valid()) fail(ErrorCode::invalid_argument, "degenerate record path");
    double arc = z_prev ? (z - *z_prev).norm() : tmpl.mean_segment();
    arc = std::min(arc, tmpl.perimeter() / 4.0);
    Eigen::VectorXd u = tmpl.advance_from(z, arc);
    return state_.scaffold.apply(u);
}

Eigen::VectorXd Engine::retrieval_inverse(const Eigen::VectorXd& z_next,
                                          const Eigen::VectorXd* z_prev) const {
    if (state_.library.empty())
        fail(ErrorCode::no_retrieval, "empty cycle library");
    // Undo the fast correction, then align on the closest loop.
    Eigen::VectorXd u = z_next - state_.scaffold.offset;
    u = u.cwiseQuotient(state_.scaffold.gain.cwiseMax(1e-9));

    const mem::CycleRecord* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& rec : state_.library.records()) {
        const LoopTemplate& tmpl = template_for(rec);
        if (!tmpl.valid()) continue;
        Eigen::VectorXd on_loop = tmpl.advance_from(u, 0.0);
        double d = (u - on_loop).norm();
        if (d < best_d) {
            best_d = d;
            best = &rec;
        }
    }
    if (!best) fail(ErrorCode::no_retrieval, "no usable record");
    const LoopTemplate& tmpl = template_for(*best);
    double arc = z_prev ? (z_next - *z_prev).norm() : tmpl.mean_segment();
    arc = std::min(arc, tmpl.perimeter() / 4.0);
    return tmpl.advance_from(u, -arc);
}

void Engine::fast_adapt(const Eigen::VectorXd& error, const Eigen::VectorXd& raw_prediction) {
    if (cfg_.eta_fast <= 0) return;
    Eigen::VectorXd scale = (raw_prediction.array().square() + 1.0).matrix();
    state_.scaffold.gain +=
        cfg_.eta_fast * error.cwiseProduct(raw_prediction).cwiseQuotient(scale);
    state_.scaffold.offset += cfg_.eta_fast * error.cwiseQuotient(scale);
    state_.scaffold.clip(cfg_.scaffold_bound);
}

Engine::ClosureOutcome Engine::closure_test(const tasks::LatentTrajectory& tr,
                                            const std::string& modality) {
    ClosureOutcome out;
    tasks::StateGraph g = tasks::build_state_graph(tr, cfg_.bin, cfg_.knn);
    out.boundary_norm = residual_boundary_norm(g);

    ph::PersistenceDiagram diagram = ph::reduce(ph::build_graph_filtration(to_weighted_graph(g)));
    double tau = cfg_.tau;
    if (cfg_.tau_mode == "elbow") tau = ph::elbow_tau(diagram, 1, cfg_.tau);
    std::vector<ph::Bar> kept;
    for (const auto& bar : ph::pers_tau(diagram, tau))
        if (bar.dim == 1) kept.push_back(bar);

    mem::AdmitResult staged;
    if (out.boundary_norm == 0.0 && !kept.empty())
        staged = mem::admit(state_.library, kept, g, state_.episode_counter, modality,
                            cfg_.fill_factor);

    std::vector<std::vector<Eigen::VectorXd>> extra;
    for (const auto& rec : staged.admitted) extra.push_back(rec.path);
    mem::AnchorContext context =
        mem::build_anchor_context(state_.library, extra, cfg_.fill_factor);
    std::vector<int> falsified = mem::falsify(state_.library, context, tau);

    mem::update_memory(state_.library, staged.admitted, falsified);
    for (int id : falsified) template_cache_.erase(id);

    for (const auto& rec : staged.admitted) out.admitted.push_back(rec.class_id);
    out.falsified = std::move(falsified);
    out.matched = staged.matched_existing;
    return out;
}

void Engine::slow_consolidate() {
    // Consolidation folds residual corrections into structure, so with an
    // empty library or an untouched fast path there is nothing to fold.
    if (state_.library.empty() || state_.scaffold.is_neutral()) {
        state_.scaffold = Scaffold::neutral(cfg_.latent_dim);
        return;
    }
    // Replay consistency: pull the decoder toward the one-step transition
    // map of the stored loops, resampled at the observed step scale and
    // with long-lived records weighted highest.
    const int d = cfg_.latent_dim;
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(d + 1, d + 1);
    Eigen::MatrixXd ytx = Eigen::MatrixXd::Zero(d, d + 1);
    for (const auto& rec : state_.library.records()) {
        const LoopTemplate& tmpl = template_for(rec);
        if (!tmpl.valid()) continue;
        const auto& dense = tmpl.dense_points();
        const int n = static_cast<int>(dense.size());
        double spacing = tmpl.perimeter() / n;
        int stride = std::max(
            1, static_cast<int>(std::lround(state_.mean_step_arc / std::max(spacing, 1e-12))));
        double penalty = 0.0;
        if (!std::isinf(rec.lifetime) && cfg_.tau > 0)
            penalty = std::clamp(1.0 - rec.lifetime / (2.0 * cfg_.tau), 0.0, 1.0);
        double w = std::max(0.1, cfg_.lambda_r - cfg_.lambda_p * penalty);
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd x(d + 1);
            x << dense[i], 1.0;
            xtx += w * x * x.transpose();
            ytx += w * dense[(i + stride) % n] * x.transpose();
        }
    }
    xtx += 1e-9 * Eigen::MatrixXd::Identity(d + 1, d + 1);
    Eigen::MatrixXd sol = ytx * xtx.inverse();
    Eigen::MatrixXd target_w = sol.leftCols(d);
    Eigen::VectorXd target_b = sol.col(d);
    state_.decoder_w += cfg_.eta_slow * (target_w - state_.decoder_w);
    state_.decoder_b += cfg_.eta_slow * (target_b - state_.decoder_b);
    state_.scaffold = Scaffold::neutral(cfg_.latent_dim);
}

double Engine::window_coherence(const tasks::LatentTrajectory& tr) const {
    if (state_.library.empty()) return 0.0;
    const int w = 4 * cfg_.bin;
    const int stride = 2 * cfg_.bin;
    const int T = tr.steps();
    if (T < w) return 0.0;
    std::map<int, int> votes;
    int windows = 0;
    for (int start = 0; start + w <= T; start += stride) {
        tasks::LatentTrajectory sub;
        sub.states.assign(tr.states.begin() + start, tr.states.begin() + start + w);
        auto hits = mem::retrieve(sub, state_.library, 1);
        if (hits.empty()) continue;
        votes[hits.front().first->class_id] += 1;
        ++windows;
    }
    if (windows == 0) return 0.0;
    int best = 0;
    for (const auto& [cls, n] : votes) best = std::max(best, n);
    return static_cast<double>(best) / windows;
}

EpisodeReport Engine::run_episode(const tasks::Episode& ep) {
    const tasks::Encoder& enc = encoder_for(ep);
    tasks::LatentTrajectory tr = enc.encode(ep);
    tr.time_bin = cfg_.bin;
    state_.library.observe_states(tr.states);

    double step_sum = 0.0;
    for (int t = 0; t + 1 < tr.steps(); ++t)
        step_sum += (tr.states[t + 1] - tr.states[t]).norm();
    double step_mean = tr.steps() > 1 ? step_sum / (tr.steps() - 1) : 0.0;
    state_.mean_step_arc =
        state_.mean_step_arc > 0 ? 0.8 * state_.mean_step_arc + 0.2 * step_mean : step_mean;

    EpisodeReport report;
    report.episode = state_.episode_counter;
    report.loop_class = ep.loop_class;
    report.modality = tasks::to_string(ep.modality);

    // S1: structure-first retrieval. Without a hit the episode runs from
    // scratch: predictions fall back to the slow readout while the
    // episode's own structure only becomes available through the closure
    // test, so the fitting pass is charged to the inner-step budget.
    LoopTemplate tmpl;
    int setup_steps = 0;
    if (cfg_.retrieval_enabled && !state_.library.empty()) {
        auto hits = mem::retrieve(tr, state_.library, cfg_.k);
        for (const auto& [rec, cost] : hits) report.retrieval.emplace_back(rec->class_id, cost);
        if (!hits.empty()) {
            tmpl = template_for(*hits.front().first);
            if (auto* rec = state_.library.find_mutable(hits.front().first->class_id))
                rec->hit_count += 1;
        }
    }
    if (!tmpl.valid()) setup_steps = tr.steps();

    // S2: residual-only adaptation.
    PassResult pass = adaptation_pass(tr, tmpl, true);
    state_.scaffold = pass.scaffold;
    report.residual_series = pass.residual_sq;
    report.residual_median = median_of(pass.residual_sq);
    report.inner_steps_used =
        setup_steps + (pass.first_target_step >= 0 ? pass.first_target_step + 1
                                                   : std::max(0, tr.steps() - 1));
    report.window_coherence = window_coherence(tr);

    // S3: closure test and memory update.
    ClosureOutcome closure = closure_test(tr, tasks::to_string(ep.modality));
    report.boundary_norm = closure.boundary_norm;
    report.admitted = closure.admitted;
    report.falsified = closure.falsified;
    report.matched = closure.matched;
    report.phi_size_after = static_cast<int>(state_.library.size());

    // S4: slow consolidation.
    slow_consolidate();

    state_.episode_counter += 1;
    history_.push_back(report);
    report.entropy_proxy = entropy_proxy(history_, cfg_);
    history_.back().entropy_proxy = report.entropy_proxy;
    return report;
}

Engine::StepsToTarget Engine::steps_to_target(const tasks::Episode& ep, bool use_retrieval) {
    const tasks::Encoder& enc = encoder_for(ep);
    tasks::LatentTrajectory tr = enc.encode(ep);

    LoopTemplate tmpl;
    int setup = 0;
    if (use_retrieval && cfg_.retrieval_enabled && !state_.library.empty()) {
        auto hits = mem::retrieve(tr, state_.library, 1);
        if (!hits.empty()) tmpl = template_for(*hits.front().first);
    }
    if (!tmpl.valid()) {
        tmpl = fit_template(tr.states, cfg_.bin);
        setup = tr.steps();  // the direct fit consumes one full pass
    }
    PassResult pass = adaptation_pass(tr, tmpl, true);
    StepsToTarget out;
    out.reached = pass.first_target_step >= 0;
    out.steps = setup + (out.reached ? pass.first_target_step + 1 : std::max(0, tr.steps() - 1));
    return out;
}

double Engine::amortized_loss(const tasks::Episode& ep) {
    const tasks::Encoder& enc = encoder_for(ep);
    tasks::LatentTrajectory tr = enc.encode(ep);
    LoopTemplate tmpl;
    if (cfg_.retrieval_enabled && !state_.library.empty()) {
        auto hits = mem::retrieve(tr, state_.library, 1);
        if (!hits.empty()) tmpl = template_for(*hits.front().first);
    }
    if (!tmpl.valid()) tmpl = fit_template(tr.states, cfg_.bin);
    PassResult pass = adaptation_pass(tr, tmpl, true);
    double sum = std::accumulate(pass.residual_sq.begin(), pass.residual_sq.end(), 0.0);
    return pass.residual_sq.empty() ? 0.0 : sum / pass.residual_sq.size();
}

double Engine::oracle_loss(const tasks::Episode& ep) {
    const tasks::Encoder& enc = encoder_for(ep);
    tasks::LatentTrajectory tr = enc.encode(ep);
    LoopTemplate tmpl = fit_template(tr.states, cfg_.bin);
    PassResult pass = adaptation_pass(tr, tmpl, true);
    double sum = std::accumulate(pass.residual_sq.begin(), pass.residual_sq.end(), 0.0);
    return pass.residual_sq.empty() ? 0.0 : sum / pass.residual_sq.size();
}

GapEstimate amortization_gap(Engine engine, const std::vector<tasks::Episode>& episodes) {
    if (episodes.size() < 5)
        fail(ErrorCode::insufficient_episodes, "amortization gap needs >= 5 episodes");
    GapEstimate out;
    for (const auto& ep : episodes) {
        out.amortized += engine.amortized_loss(ep);
        out.oracle += engine.oracle_loss(ep);
    }
    out.amortized /= static_cast<double>(episodes.size());
    out.oracle /= static_cast<double>(episodes.size());
    out.epsilon = out.amortized - out.oracle;
    return out;
}

}  // namespace mai::engine
