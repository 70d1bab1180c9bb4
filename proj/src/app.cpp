#include "crlab/app.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "crlab/calculus.hpp"
#include "crlab/cutoff.hpp"
#include "crlab/deformation.hpp"
#include "crlab/diagnostics.hpp"
#include "crlab/embedding.hpp"
#include "crlab/numerics.hpp"
#include "crlab/spectrum.hpp"

namespace crlab::app {

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Configuration

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& target) {
    if (j.contains(key) && !j.at(key).is_null()) target = j.at(key).get<T>();
}

ModelConfig parse_model(const json& j, const std::string& where) {
    check_keys(j, {"p", "q", "resolution", "delta1", "delta2", "m0"}, where);
    ModelConfig m;
    read(j, "p", m.p);
    read(j, "q", m.q);
    read(j, "resolution", m.resolution);
    read(j, "delta1", m.delta1);
    read(j, "delta2", m.delta2);
    read(j, "m0", m.m0);
    if (!(m.p > 0.0) || !(m.q > 0.0)) throw ConfigError(where + ": weights must be positive");
    if (m.resolution < 4) throw ConfigError(where + ": resolution must be at least 4");
    if (!(m.delta1 > 0.0 && m.delta1 < m.delta2 && m.delta2 < 1.0)) {
        throw ConfigError(where + ": need 0 < delta1 < delta2 < 1");
    }
    if (m.m0 < 1) throw ConfigError(where + ": m0 is 1-based");
    return m;
}

json model_json(const ModelConfig& m) {
    return {{"p", m.p}, {"q", m.q}, {"resolution", m.resolution}, {"delta1", m.delta1}, {"delta2", m.delta2},
            {"m0", m.m0}};
}

void check_grid(const std::vector<double>& g, const std::string& name, std::size_t min_size) {
    if (g.size() < min_size) throw ConfigError(name + " needs at least " + std::to_string(min_size) + " values");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(g[i] > 0.0)) throw ConfigError(name + " values must be positive");
        if (i > 0 && !(g[i] > g[i - 1])) throw ConfigError(name + " must be strictly ascending");
    }
}

// ---------------------------------------------------------------------------
// Small utilities

template <class F>
void parallel_for(std::size_t n, int jobs, F&& f) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> tasks;
    tasks.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        tasks.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next++; i < n; i = next++) f(i);
        }));
    }
    for (auto& t : tasks) t.get();
}

/// Uniform double in [0, 1) from the top 53 bits.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

json fit_json(const RateFit& f) {
    json pairs = json::array();
    for (const auto& [k, v] : f.pairs) pairs.push_back({k, v});
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}, {"pairs", pairs}};
}

bool in_window(double v, double lo, double hi) { return v >= lo && v <= hi; }

bool is_round(const ModelConfig& m) { return m.p == 1.0 && m.q == 1.0; }

std::vector<ModelPoint> main_samples(const SasakianModel& model, const RunConfig& cfg) {
    return sample_points(model, cfg.scheme, cfg.sample_count, cfg.seed);
}

/// Hopf grid plus seeded quasi-random points.
std::vector<ModelPoint> certificate_samples(const SasakianModel& model, const RunConfig& cfg) {
    auto pts = sample_points(model, SampleScheme::HopfGrid, cfg.sample_count, cfg.seed);
    const auto extra = sample_points(model, SampleScheme::QuasiRandom, cfg.quasi_random_count, cfg.seed);
    pts.insert(pts.end(), extra.begin(), extra.end());
    return pts;
}

double required_cap(const RunConfig& cfg, double needed) {
    if (cfg.spectrum_cap) {
        if (*cfg.spectrum_cap < needed) {
            throw TruncationError("spectrum cap " + format_double(*cfg.spectrum_cap) + " is below the required " +
                                  format_double(needed));
        }
        return *cfg.spectrum_cap;
    }
    return needed;
}

// ---------------------------------------------------------------------------
// Embedding runs over the k-grid

struct KRecord {
    double k = 0.0;
    bool ok = false;
    std::string failure;
    std::shared_ptr<const EmbeddingFamily> family;
    std::optional<GraphSolution> graph;

    std::size_t n_k = 0;
    std::size_t components = 0;
    std::size_t cutoff_components = 0;
    bool blocks_separated = false;
    bool underflow_dropped = false;
    double sup_phi = 0.0;
    double sup_dphi = 0.0;
    double max_residual = 0.0;
    double min_levi = 0.0;
    double max_equivariance = 0.0;
    double max_reeb_derivative = 0.0;
    double beta_min = 0.0;
    double beta_max = 0.0;
    bool beta_in_range = false;
    std::size_t nonpositive_slopes = 0;
    double min_scaled_slope = 0.0;
    double max_newton_iterations = 0.0;
    std::array<double, 3> moment_deviation{};
    MapDiagnostics map;
};

struct EmbedRun {
    ModelConfig mc;
    std::shared_ptr<const SasakianModel> model;
    std::shared_ptr<const Spectrum> spectrum;
    std::shared_ptr<const CutoffSpec> cutoff;
    ReferenceEmbedding reference;
    std::vector<ModelPoint> samples;
    std::vector<KRecord> per_k;
    std::optional<double> k0;
    double c0 = 0.0;

    std::vector<const KRecord*> converged() const {
        std::vector<const KRecord*> out;
        for (const auto& r : per_k) {
            if (k0 && r.k >= *k0) out.push_back(&r);
        }
        return out;
    }
};

void analyse_k(KRecord& rec, const EmbedRun& run, const RunConfig& cfg) {
    const EmbeddingFamily& fam = *rec.family;
    const SasakianModel& model = *run.model;
    const CutoffSpec& cut = *run.cutoff;
    const double k = rec.k;
    rec.graph = solve_graph(rec.family, run.samples);
    const GraphSolution& g = *rec.graph;
    rec.components = fam.components().size();
    rec.cutoff_components = fam.cutoff_count();
    rec.blocks_separated = fam.blocks_separated();
    rec.sup_phi = g.sup_phi();
    rec.sup_dphi = g.sup_dphi();
    rec.max_residual = g.max_residual();
    const auto beta = fam.beta();
    rec.beta_min = *std::min_element(beta.begin(), beta.end());
    rec.beta_max = *std::max_element(beta.begin(), beta.end());
    rec.beta_in_range = rec.beta_min >= run.c0 && rec.beta_max <= k;

    rec.min_levi = std::numeric_limits<double>::infinity();
    rec.min_scaled_slope = std::numeric_limits<double>::infinity();
    const double b1 = cut.b(1);
    const double b2 = cut.b(2);
    const std::array<double, 2> flow_times{0.7, 2.3};
    for (const auto& s : g.samples()) {
        rec.max_newton_iterations = std::max(rec.max_newton_iterations, static_cast<double>(s.iterations));
        rec.min_levi = std::min(rec.min_levi, levi_deformed(model, s.jet, s.point));
        rec.max_reeb_derivative =
            std::max(rec.max_reeb_derivative, std::abs(s.jet.derivative(model.reeb_vector(s.point))));

        const PointProfile prof(fam, s.point);
        rec.underflow_dropped = rec.underflow_dropped || prof.underflow_dropped();
        for (double sv : {s.phi, 0.0, -1.0 / k, 1.0 / k, -2.0 / k, 2.0 / k}) {
            if (!(prof.norm_sq(sv, 1) > 0.0)) ++rec.nonpositive_slopes;
        }
        rec.min_scaled_slope = std::min(rec.min_scaled_slope, prof.norm_sq(s.phi, 1) / k);
        rec.moment_deviation[0] = std::max(rec.moment_deviation[0], std::abs(prof.norm_sq(0.0) - 1.0));
        rec.moment_deviation[1] = std::max(rec.moment_deviation[1], std::abs(prof.norm_sq(s.phi, 1) / k - 2.0 * b1));
        rec.moment_deviation[2] =
            std::max(rec.moment_deviation[2], std::abs(prof.norm_sq(s.phi, 2) / (k * k) - 4.0 * b2));

        const SphereImage img = sphere_map(fam, s.point, s.phi);
        for (double t : flow_times) {
            const ModelPoint y = reeb_flow(model, s.point, t);
            const SphereImage moved = sphere_map(fam, y, solve_phi(fam, y).phi);
            for (std::size_t j = 0; j < img.components.size(); ++j) {
                const double mag = std::abs(img.components[j]);
                if (mag == 0.0) continue;
                const cplx expected = std::polar(1.0, img.beta[j] * t) * img.components[j];
                rec.max_equivariance = std::max(rec.max_equivariance, std::abs(moved.components[j] - expected) / mag);
            }
        }
    }
    const auto pairs = sample_points(model, SampleScheme::QuasiRandom, cfg.pair_count, cfg.seed);
    rec.map = map_diagnostics(sphere_map_function(rec.family), run.samples, pairs, nullptr, cfg.seed);
}

EmbedRun embed_model(const ModelConfig& mc, const RunConfig& cfg) {
    EmbedRun run;
    run.mc = mc;
    run.model = std::make_shared<const SasakianModel>(make_weighted_sphere(mc.p, mc.q, mc.resolution));
    const double kmax = cfg.k_grid.back();
    run.spectrum = std::make_shared<const Spectrum>(
        enumerate_modes(*run.model, required_cap(cfg, std::max(kmax, mc.delta2 * kmax))));
    run.cutoff = std::make_shared<const CutoffSpec>(make_bump(mc.delta1, mc.delta2, cfg.moment_order));
    run.samples = main_samples(*run.model, cfg);
    EmbeddingOptions opts;
    opts.window_threshold = cfg.tolerances.window;
    run.reference = build_reference_embedding(*run.model, *run.spectrum, mc.m0, run.samples, opts);
    run.c0 = std::numeric_limits<double>::infinity();
    for (const auto& m : run.reference.modes) run.c0 = std::min(run.c0, m.lambda);

    run.per_k.resize(cfg.k_grid.size());
    parallel_for(cfg.k_grid.size(), cfg.jobs, [&](std::size_t i) {
        KRecord& rec = run.per_k[i];
        rec.k = cfg.k_grid[i];
        rec.n_k = run.spectrum->count_at_most(rec.k);
        try {
            rec.family = std::make_shared<const EmbeddingFamily>(
                build_Fk(*run.model, *run.spectrum, *run.cutoff, rec.k, run.reference));
            analyse_k(rec, run, cfg);
            rec.ok = true;
        } catch (const numerics::BracketError& e) {
            rec.ok = false;
            rec.failure = e.what();
            rec.graph.reset();
        }
    });
    for (auto it = run.per_k.rbegin(); it != run.per_k.rend() && it->ok; ++it) run.k0 = it->k;
    if (!run.k0) {
        std::string first = run.per_k.back().failure;
        throw numerics::BracketError("the largest k in the grid did not converge: " + first);
    }
    return run;
}

json embed_json(const EmbedRun& run) {
    json rows = json::array();
    for (const auto& r : run.per_k) {
        json row{{"k", r.k}, {"N_k", r.n_k}, {"ok", r.ok}};
        if (!r.ok) {
            row["failure"] = r.failure;
        } else {
            row.update({{"components", r.components},
                        {"cutoff_components", r.cutoff_components},
                        {"blocks_separated", r.blocks_separated},
                        {"underflow_dropped", r.underflow_dropped},
                        {"sup_phi", r.sup_phi},
                        {"sup_dphi", r.sup_dphi},
                        {"max_sphere_residual", r.max_residual},
                        {"min_levi", r.min_levi},
                        {"max_equivariance_error", r.max_equivariance},
                        {"max_reeb_derivative_of_phi", r.max_reeb_derivative},
                        {"beta_range", {r.beta_min, r.beta_max}},
                        {"nonpositive_s_slopes", r.nonpositive_slopes},
                        {"min_scaled_s_slope_at_root", r.min_scaled_slope},
                        {"max_newton_iterations", r.max_newton_iterations},
                        {"moment_deviation", {r.moment_deviation[0], r.moment_deviation[1], r.moment_deviation[2]}},
                        {"min_singular_value", r.map.min_singular_value},
                        {"min_separation_ratio", r.map.min_separation_ratio}});
        }
        rows.push_back(row);
    }
    return {{"model", model_json(run.mc)},
            {"sample_count", run.samples.size()},
            {"reference",
             {{"window", run.reference.modes.size()},
              {"m0", run.reference.m0},
              {"collar_width", run.reference.collar_width},
              {"sigma0", run.reference.sigma0},
              {"min_singular_value", run.reference.diagnostics.min_singular_value},
              {"min_separation_ratio", run.reference.diagnostics.min_separation_ratio}}},
            {"C0", run.c0},
            {"k0", run.k0 ? json(*run.k0) : json(nullptr)},
            {"cutoff", {{"a0", run.cutoff->a0()}, {"b1", run.cutoff->b(1)}, {"b2", run.cutoff->b(2)}}},
            {"embedding_claims", "immersion and injectivity are certified on the finite sample sets only"},
            {"per_k", rows}};
}

// ---------------------------------------------------------------------------
// Runner: computes each section at most once.

class Runner {
public:
    Runner(const RunConfig& cfg, RunOutput& out) : cfg_(cfg), out_(out) {}

    void spectrum();
    void kernel();
    void embed();
    void deform();
    void example();
    void continuation();
    void rates();
    void solver_check();

private:
    const EmbedRun& main_run() {
        if (!main_) main_ = std::make_unique<EmbedRun>(embed_model(cfg_.model, cfg_));
        return *main_;
    }
    const EmbedRun& derivative_run() {
        if (!cfg_.derivative_model) return main_run();
        if (!deriv_) deriv_ = std::make_unique<EmbedRun>(embed_model(*cfg_.derivative_model, cfg_));
        return *deriv_;
    }
    void add(int id, const std::string& name, bool pass, json details, bool applicable = true) {
        for (const auto& c : out_.criteria) {
            if (c.id == id) return;
        }
        out_.criteria.push_back({id, name, pass, std::move(details), applicable});
    }

    const RunConfig& cfg_;
    RunOutput& out_;
    std::unique_ptr<EmbedRun> main_;
    std::unique_ptr<EmbedRun> deriv_;
    bool spectrum_done_ = false, kernel_done_ = false, embed_done_ = false, deform_done_ = false,
         example_done_ = false, continue_done_ = false;
};

void Runner::spectrum() {
    if (spectrum_done_) return;
    spectrum_done_ = true;
    const ModelConfig& mc = cfg_.model;
    const SasakianModel model = make_weighted_sphere(mc.p, mc.q, mc.resolution);
    const Spectrum sp = enumerate_modes(model, required_cap(cfg_, cfg_.spectrum_k_grid.back()));

    CsvTable table{"spectrum.csv", {"j", "a", "b", "lambda", "normSq"}, {}};
    for (const auto& m : sp.modes()) {
        table.rows.push_back({std::to_string(m.index + 1), std::to_string(m.a), std::to_string(m.b),
                              format_double(m.lambda), format_double(m.norm_sq)});
    }
    out_.tables.push_back(std::move(table));

    json rows = json::array();
    bool closed_form_ok = true;
    bool lattice_ok = true;
    std::vector<std::pair<double, double>> counts;
    for (double k : cfg_.spectrum_k_grid) {
        const std::size_t n = sp.count_at_most(k);
        // Lattice count: for each b, the admissible a are 0..floor((k - q b) / p).
        std::size_t lattice = 0;
        for (int b = 0; mc.q * b <= k; ++b) lattice += static_cast<std::size_t>(std::floor((k - mc.q * b) / mc.p)) + 1;
        lattice -= 1;
        json row{{"k", k}, {"N_k", n}, {"lattice_count", lattice}};
        lattice_ok = lattice_ok && lattice == n;
        if (is_round(mc)) {
            std::size_t closed = 0;
            for (int m = 1; m <= static_cast<int>(std::floor(k)); ++m) closed += static_cast<std::size_t>(m + 1);
            row["closed_form"] = closed;
            closed_form_ok = closed_form_ok && closed == n;
        }
        counts.emplace_back(k, static_cast<double>(n));
        rows.push_back(row);
    }
    const RateFit fit = fit_rate(counts);
    out_.report["spectrum"] = {{"model", model_json(mc)},
                               {"cap", sp.cap()},
                               {"modes", sp.size()},
                               {"counts", rows},
                               {"counting_fit", fit_json(fit)}};
    // The closed form and the slope window are stated for the round sphere;
    // other weights are held to the exact lattice count.
    const bool slope_ok = in_window(fit.slope, 1.9, 2.1);
    const bool pass = is_round(mc) ? closed_form_ok && lattice_ok && slope_ok : lattice_ok;
    add(10, "counting law", pass,
        {{"closed_form_match", is_round(mc) ? json(closed_form_ok) : json("not applicable")},
         {"lattice_match", lattice_ok},
         {"slope", fit.slope},
         {"slope_window", is_round(mc) ? json({1.9, 2.1}) : json("not applicable")}});
}

void Runner::kernel() {
    if (kernel_done_) return;
    kernel_done_ = true;
    const ModelConfig& mc = cfg_.model;
    const SasakianModel model = make_weighted_sphere(mc.p, mc.q, mc.resolution);
    const CutoffSpec cut = make_bump(mc.delta1, mc.delta2, cfg_.moment_order);
    const Spectrum sp = enumerate_modes(model, required_cap(cfg_, mc.delta2 * cfg_.kernel_k_grid.back()));
    const auto pts = main_samples(model, cfg_);
    const LeadingCoefficientReport rep = verify_leading_coefficient(model, sp, cut, cfg_.kernel_k_grid, pts);

    CsvTable table{"kernel.csv", {"k", "point_id", "scaled_value"}, {}};
    json rows = json::array();
    double shell_rel = 0.0;
    double spread_rel = 0.0;
    std::optional<double> check_dev;
    for (const auto& row : rep.rows) {
        for (std::size_t i = 0; i < row.scaled.size(); ++i) {
            table.rows.push_back({format_double(row.k), std::to_string(i), format_double(row.scaled[i])});
        }
        json r{{"k", row.k}, {"max_deviation", row.max_deviation}, {"spread", row.spread}};
        if (is_round(mc)) {
            double oracle = 0.0;
            for (int m = 1; m <= static_cast<int>(std::ceil(mc.delta2 * row.k)); ++m) {
                const double c = eval_chi_k(cut, m, row.k);
                oracle += c * c * (m + 1.0);
            }
            const double scale = row.k * row.k;
            double mean = 0.0;
            for (double v : row.scaled) {
                shell_rel = std::max(shell_rel, std::abs(v * scale - oracle) / oracle);
                mean += v / static_cast<double>(row.scaled.size());
            }
            spread_rel = std::max(spread_rel, row.spread / mean);
            r["shell_oracle_scaled"] = oracle / scale;
        }
        if (row.k == cfg_.kernel_check_k) check_dev = row.max_deviation;
        rows.push_back(r);
    }
    out_.tables.push_back(std::move(table));
    out_.report["kernel"] = {{"model", model_json(mc)},
                             {"a0", rep.a0},
                             {"rows", rows},
                             {"remainder_fit",
                              {{"slope", rep.remainder_slope},
                               {"intercept", rep.remainder_intercept},
                               {"r_squared", rep.remainder_r2}}}};
    const bool lead_ok = check_dev && *check_dev <= 0.1 * rep.a0;
    const bool slope_ok = in_window(rep.remainder_slope, -1.4, -0.6);
    json details{{"check_k", cfg_.kernel_check_k},
                 {"relative_deviation_at_check_k", check_dev ? json(*check_dev / rep.a0) : json(nullptr)},
                 {"remainder_slope", rep.remainder_slope},
                 {"slope_window", {-1.4, -0.6}}};
    if (!is_round(mc) || mc.delta1 != 0.25 || mc.delta2 != 0.75) {
        details["reason"] = "stated for beta = (1, 1) with (delta1, delta2) = (0.25, 0.75)";
        add(1, "kernel leading term", false, details, false);
        return;
    }
    const bool round_ok = shell_rel <= 1e-10 && spread_rel <= 1e-9;
    details["shell_oracle_max_relative_error"] = shell_rel;
    details["max_relative_spread"] = spread_rel;
    add(1, "kernel leading term", lead_ok && slope_ok && round_ok, details);
}

void Runner::embed() {
    if (embed_done_) return;
    embed_done_ = true;
    const EmbedRun& run = main_run();
    out_.report["embed"] = embed_json(run);

    CsvTable table{"phi_k.csv", {"k", "sup_phi", "sup_dphi"}, {}};
    for (const auto& r : run.per_k) {
        if (r.ok) table.rows.push_back({format_double(r.k), format_double(r.sup_phi), format_double(r.sup_dphi)});
    }
    out_.tables.push_back(std::move(table));

    const auto conv = run.converged();
    const bool enough = conv.size() >= 3;

    // 2: decay of sup |phi_k| and sup |d phi_k|.
    {
        json d{{"k0", *run.k0}};
        bool pass = false;
        if (enough) {
            std::vector<std::pair<double, double>> sup;
            for (const auto* r : conv) sup.emplace_back(r->k, r->sup_phi);
            const RateFit fs = fit_rate(sup);
            const EmbedRun& drun = derivative_run();
            std::vector<std::pair<double, double>> dsup;
            for (const auto* r : drun.converged()) dsup.emplace_back(r->k, r->sup_dphi);
            d["sup_phi_fit"] = fit_json(fs);
            d["sup_phi_window"] = {-2.3, -1.7};
            d["derivative_model"] = model_json(drun.mc);
            bool dpass = false;
            if (dsup.size() >= 3) {
                const RateFit fd = fit_rate(dsup);
                d["sup_dphi_fit"] = fit_json(fd);
                dpass = in_window(fd.slope, -2.5, -1.5);
            }
            d["sup_dphi_window"] = {-2.5, -1.5};
            if (cfg_.derivative_model) out_.report["embed_derivative_model"] = embed_json(drun);
            pass = in_window(fs.slope, -2.3, -1.7) && dpass;
        } else {
            d["reason"] = "fewer than three k values at or above k0";
        }
        add(2, "graph-function decay", pass, d);
    }
    // 3: sphere condition.
    {
        double worst = 0.0;
        for (const auto* r : conv) worst = std::max(worst, r->max_residual);
        add(3, "sphere condition", worst <= cfg_.tolerances.solve,
            {{"max_residual", worst}, {"tolerance", cfg_.tolerances.solve}, {"samples", run.samples.size()}});
    }
    // 4: equivariance and weight bounds.
    {
        double worst = 0.0;
        bool range = true;
        for (const auto* r : conv) {
            worst = std::max(worst, r->max_equivariance);
            range = range && r->beta_in_range;
        }
        add(4, "equivariance", worst <= cfg_.tolerances.equivariance && range,
            {{"max_relative_error", worst},
             {"tolerance", cfg_.tolerances.equivariance},
             {"C0", run.c0},
             {"beta_within_C0_k", range}});
    }
    // 5: monotonicity and the slope lower bound.
    {
        std::size_t bad = 0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        json per = json::array();
        for (const auto* r : conv) {
            bad += r->nonpositive_slopes;
            lo = std::min(lo, r->min_scaled_slope);
            hi = std::max(hi, r->min_scaled_slope);
            per.push_back({r->k, r->min_scaled_slope});
        }
        add(5, "monotonicity and slope bound", bad == 0 && lo > 0.0 && lo >= 0.5 * hi,
            {{"nonpositive_samples", bad}, {"fitted_constant", lo}, {"per_k_minimum", per}});
    }
    // 6: moment limits, l = 0 evaluated at s = 0 and l = 1, 2 at the root.
    {
        json d = json::object();
        bool pass = enough;
        if (enough) {
            for (int l = 0; l < 3; ++l) {
                std::vector<std::pair<double, double>> dev;
                double c = 0.0;
                for (const auto* r : conv) {
                    dev.emplace_back(r->k, r->moment_deviation[l]);
                    c = std::max(c, r->k * r->moment_deviation[l]);
                }
                const RateFit f = fit_rate(dev);
                const double target = std::pow(2.0, l) * run.cutoff->b(l);
                d["l" + std::to_string(l)] = {{"limit", target},
                                               {"evaluated_at", l == 0 ? "s = 0" : "s = phi_k"},
                                               {"fitted_C", c},
                                               {"fit", fit_json(f)}};
                pass = pass && in_window(f.slope, -1.4, -0.6);
            }
            d["slope_window"] = {-1.4, -0.6};
        }
        add(6, "moment limits", pass, d);
    }
}

void Runner::deform() {
    if (deform_done_) return;
    deform_done_ = true;
    const EmbedRun& run = main_run();
    const SasakianModel& model = *run.model;
    const auto cert_pts = certificate_samples(model, cfg_);

    double min_levi = std::numeric_limits<double>::infinity();
    json per = json::array();
    const KRecord* last = nullptr;
    CertificateReport last_cert;
    for (const auto* r : run.converged()) {
        min_levi = std::min(min_levi, r->min_levi);
        CertificateProblem prob;
        for (const auto& c : r->family->components()) {
            prob.components.push_back({std::exp(0.5 * c.log_weight), c.mode, c.mode.lambda});
        }
        auto fam = r->family;
        prob.phi = [fam](const ModelPoint& x) { return solve_phi(*fam, x).phi; };
        prob.samples = cert_pts;
        const CertificateReport cert = certificate_PN(prob, cfg_.tolerances.certificate);
        per.push_back({{"k", r->k},
                       {"min_levi", r->min_levi},
                       {"certificate_max", cert.max_abs},
                       {"certificate_mean", cert.mean_abs},
                       {"certificate_pass", cert.pass}});
        last = r;
        last_cert = cert;
    }
    CsvTable table{"certificate.csv", {"sample_id", "residual"}, {}};
    for (std::size_t i = 0; i < last_cert.residuals.size(); ++i) {
        table.rows.push_back({std::to_string(i), format_double(last_cert.residuals[i])});
    }
    out_.tables.push_back(std::move(table));

    double zero_gap = 0.0;
    double undeformed_min = std::numeric_limits<double>::infinity();
    for (const auto& x : run.samples) {
        const double base = levi_undeformed(model, x);
        zero_gap = std::max(zero_gap, std::abs(levi_deformed(model, ScalarJet{}, x) - base));
        undeformed_min = std::min(undeformed_min, base);
    }
    out_.report["deform"] = {{"model", model_json(run.mc)},
                             {"certificate_k", last ? json(last->k) : json(nullptr)},
                             {"certificate_samples", cert_pts.size()},
                             {"undeformed_min_levi", undeformed_min},
                             {"per_k", per}};
    add(7, "Levi positivity", min_levi > 0.0 && zero_gap <= cfg_.tolerances.invariant,
        {{"min_levi", min_levi}, {"zero_phi_gap", zero_gap}, {"k0", *run.k0}});
}

void Runner::example() {
    if (example_done_) return;
    example_done_ = true;
    const SasakianModel model = make_weighted_sphere(1.0, 1.0, cfg_.model.resolution);
    const auto pts = certificate_samples(model, cfg_);
    const ContinuationProblem base = degree_one_base(pts);
    const double tol = cfg_.tolerances.example;
    bool pass = true;
    json rows = json::array();
    for (double eps : cfg_.example_epsilons) {
        const ExampleFamily fam = example_family(eps);
        double map_err = 0.0;
        double min_levi = std::numeric_limits<double>::infinity();
        for (const auto& x : pts) {
            const auto f = fam.map(x);
            map_err = std::max(map_err, std::abs(std::norm(f[0]) + std::norm(f[1]) - 1.0));
            min_levi = std::min(min_levi, levi_deformed(model, fam.phi_jet(x), x));
        }
        const CertificateReport cert = certificate_PN(fam.certificate(model, pts), tol);
        CertificateProblem perturbed = fam.certificate(model, pts);
        perturbed.phi = [fam](const ModelPoint& x) { return fam.phi(x) + 1e-3; };
        const CertificateReport pert = certificate_PN(perturbed, tol);
        const ContinuationSolution sol = continuation_solve(base, {std::sqrt(1.0 + eps), 1.0});
        double cont_err = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) cont_err = std::max(cont_err, std::abs(sol.values[i] - fam.phi(pts[i])));
        const bool ok = map_err <= tol && cert.max_abs <= tol && cont_err <= 1e-12;
        pass = pass && ok;
        rows.push_back({{"epsilon", eps},
                        {"max_map_defect", map_err},
                        {"certificate_max", cert.max_abs},
                        {"perturbed_certificate_max", pert.max_abs},
                        {"continuation_max_error", cont_err},
                        {"min_levi", min_levi},
                        {"pass", ok}});
    }
    out_.report["example"] = {{"samples", pts.size()}, {"rows", rows}};
    add(8, "exact example", pass, {{"tolerance", tol}, {"continuation_tolerance", 1e-12}, {"rows", rows}});
}

void Runner::continuation() {
    if (continue_done_) return;
    continue_done_ = true;
    const SasakianModel round = make_weighted_sphere(1.0, 1.0, cfg_.model.resolution);
    const auto pts = certificate_samples(round, cfg_);
    const ContinuationProblem base = degree_one_base(pts);
    const std::vector<double> r0{1.0, 1.0};
    const std::vector<double> phi0(pts.size(), 0.0);
    const double eps = cfg_.continuation_epsilon;

    std::mt19937_64 rng(cfg_.seed);
    double worst = 0.0;
    json dirs = json::array();
    for (int d = 0; d < cfg_.continuation_directions; ++d) {
        const std::vector<double> v{2.0 * unit(rng) - 1.0, 2.0 * unit(rng) - 1.0};
        const auto a = continuation_derivative(base, r0, phi0, v);
        const auto g = continuation_solve(base, {r0[0] + eps * v[0], r0[1] + eps * v[1]});
        double err = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) err = std::max(err, std::abs((g.values[i] - phi0[i]) / eps - a[i]));
        worst = std::max(worst, err);
        dirs.push_back({{"v", v}, {"max_error", err}});
    }
    const auto a10 = continuation_derivative(base, r0, phi0, {1.0, 0.0});
    const auto [mn, mx] = std::minmax_element(a10.begin(), a10.end());
    const double spread = *mx - *mn;

    json bases = json::array();
    if (!cfg_.continuation_bases.empty()) {
        const ModelConfig& mc = cfg_.model;
        const SasakianModel model = make_weighted_sphere(mc.p, mc.q, mc.resolution);
        const auto mpts = certificate_samples(model, cfg_);
        for (const auto& b : cfg_.continuation_bases) {
            double cap = 0.0;
            for (const auto& [a, bb] : b.modes) cap = std::max(cap, mc.p * a + mc.q * bb);
            const Spectrum sp = enumerate_modes(model, cap);
            ContinuationProblem prob;
            prob.samples = mpts;
            for (const auto& [a, bb] : b.modes) {
                const auto it = std::find_if(sp.modes().begin(), sp.modes().end(),
                                             [&](const EigenMode& m) { return m.a == a && m.b == bb; });
                if (it == sp.modes().end()) throw ConfigError("continuation base mode is not a positive eigenmode");
                const EigenMode m = *it;
                prob.f.push_back([m](const ModelPoint& x) { return eval_mode(m, x); });
                prob.beta.push_back(m.lambda);
            }
            const ContinuationSolution sol = continuation_solve(prob, b.r);
            const auto oracle = continuation_solve_bisection(prob, b.r);
            double gap = 0.0;
            for (std::size_t i = 0; i < oracle.size(); ++i) gap = std::max(gap, std::abs(sol.values[i] - oracle[i]));
            json modes = json::array();
            for (const auto& [a, bb] : b.modes) modes.push_back({a, bb});
            bases.push_back({{"modes", modes},
                             {"r", b.r},
                             {"max_residual", sol.max_residual},
                             {"max_bisection_gap", gap},
                             {"sup_g", max_abs(sol.values)}});
        }
    }
    out_.report["continue"] = {{"samples", pts.size()},
                               {"epsilon", eps},
                               {"directions", dirs},
                               {"A_10_spread", spread},
                               {"bases", bases}};
    add(9, "continuation derivative", worst <= 5.0 * eps && spread >= 0.1,
        {{"max_error", worst}, {"bound", 5.0 * eps}, {"A_10_spread", spread}});
}

void Runner::rates() {
    spectrum();
    kernel();
    embed();
    json fits = json::object();
    fits["counting"] = out_.report["spectrum"]["counting_fit"];
    fits["kernel_remainder"] = out_.report["kernel"]["remainder_fit"];
    for (const auto& c : out_.criteria) {
        if (c.id == 2) {
            if (c.details.contains("sup_phi_fit")) fits["sup_phi"] = c.details["sup_phi_fit"];
            if (c.details.contains("sup_dphi_fit")) fits["sup_dphi"] = c.details["sup_dphi_fit"];
        }
        if (c.id == 6) {
            for (int l = 0; l < 3; ++l) {
                const std::string key = "l" + std::to_string(l);
                if (c.details.contains(key)) fits["moment_" + key] = c.details[key]["fit"];
            }
        }
    }
    out_.report["rates"] = fits;
}

void Runner::solver_check() {
    const EmbedRun& run = main_run();
    const auto conv = run.converged();
    const auto pts = sample_points(*run.model, SampleScheme::QuasiRandom, cfg_.solver_pairs, cfg_.seed + 1);
    std::mt19937_64 rng(cfg_.seed);
    double worst = 0.0;
    for (const auto& x : pts) {
        const KRecord* r = conv[static_cast<std::size_t>(unit(rng) * static_cast<double>(conv.size()))];
        const double newton = solve_phi(*r->family, x).phi;
        const double bis = solve_phi_bisection(*r->family, x, 1e-14);
        worst = std::max(worst, std::abs(newton - bis));
    }
    out_.report["solver"] = {{"pairs", pts.size()}, {"max_newton_bisection_gap", worst}};
}

}  // namespace

// ---------------------------------------------------------------------------

RunConfig parse_config(const json& j) {
    try {
        check_keys(j,
                   {"model", "derivative_model", "k_grid", "spectrum_k_grid", "kernel_k_grid", "kernel_check_k",
                    "spectrum_cap", "moment_order", "samples", "tolerances", "example", "continuation", "out_dir",
                    "jobs"},
                   "config");
        RunConfig c;
        if (j.contains("model")) c.model = parse_model(j.at("model"), "model");
        if (j.contains("derivative_model") && !j.at("derivative_model").is_null()) {
            c.derivative_model = parse_model(j.at("derivative_model"), "derivative_model");
        }
        read(j, "k_grid", c.k_grid);
        read(j, "spectrum_k_grid", c.spectrum_k_grid);
        read(j, "kernel_k_grid", c.kernel_k_grid);
        read(j, "kernel_check_k", c.kernel_check_k);
        if (j.contains("spectrum_cap") && !j.at("spectrum_cap").is_null()) c.spectrum_cap = j.at("spectrum_cap").get<double>();
        read(j, "moment_order", c.moment_order);
        if (j.contains("samples")) {
            const json& s = j.at("samples");
            check_keys(s, {"scheme", "count", "quasi_random_count", "pair_count", "solver_pairs", "seed"}, "samples");
            if (s.contains("scheme")) c.scheme = parse_sample_scheme(s.at("scheme").get<std::string>());
            read(s, "count", c.sample_count);
            read(s, "quasi_random_count", c.quasi_random_count);
            read(s, "pair_count", c.pair_count);
            read(s, "solver_pairs", c.solver_pairs);
            read(s, "seed", c.seed);
        }
        if (j.contains("tolerances")) {
            const json& t = j.at("tolerances");
            check_keys(t, {"solve", "certificate", "invariant", "equivariance", "window", "example"}, "tolerances");
            read(t, "solve", c.tolerances.solve);
            read(t, "certificate", c.tolerances.certificate);
            read(t, "invariant", c.tolerances.invariant);
            read(t, "equivariance", c.tolerances.equivariance);
            read(t, "window", c.tolerances.window);
            read(t, "example", c.tolerances.example);
        }
        if (j.contains("example")) {
            check_keys(j.at("example"), {"epsilons"}, "example");
            read(j.at("example"), "epsilons", c.example_epsilons);
        }
        if (j.contains("continuation")) {
            const json& t = j.at("continuation");
            check_keys(t, {"epsilon", "directions", "bases"}, "continuation");
            read(t, "epsilon", c.continuation_epsilon);
            read(t, "directions", c.continuation_directions);
            if (t.contains("bases")) {
                for (const json& b : t.at("bases")) {
                    check_keys(b, {"modes", "r"}, "continuation base");
                    RunConfig::Base base;
                    for (const json& m : b.at("modes")) base.modes.emplace_back(m.at(0).get<int>(), m.at(1).get<int>());
                    base.r = b.contains("r") ? b.at("r").get<std::vector<double>>()
                                             : std::vector<double>(base.modes.size(), 1.0);
                    if (base.modes.empty() || base.r.size() != base.modes.size()) {
                        throw ConfigError("continuation base needs one r per mode");
                    }
                    c.continuation_bases.push_back(std::move(base));
                }
            }
        }
        read(j, "out_dir", c.out_dir);
        read(j, "jobs", c.jobs);

        check_grid(c.k_grid, "k_grid", 1);
        check_grid(c.spectrum_k_grid, "spectrum_k_grid", 3);
        check_grid(c.kernel_k_grid, "kernel_k_grid", 4);
        if (c.moment_order < 5) throw ConfigError("moment_order must be at least n + 4 = 5");
        if (c.sample_count < 2 || c.pair_count < 2) throw ConfigError("sample counts must be at least 2");
        if (c.solver_pairs < 1) throw ConfigError("solver_pairs must be positive");
        const Tolerances& t = c.tolerances;
        for (double v : {t.solve, t.certificate, t.invariant, t.equivariance, t.window, t.example}) {
            if (!(v > 0.0)) throw ConfigError("tolerances must be positive");
        }
        for (double e : c.example_epsilons) {
            if (!(e > -1.0)) throw ConfigError("example epsilons must exceed -1");
        }
        if (!(c.continuation_epsilon > 0.0)) throw ConfigError("continuation epsilon must be positive");
        if (c.continuation_directions < 1) throw ConfigError("continuation directions must be positive");
        if (c.jobs < 1) throw ConfigError("jobs must be positive");
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const InvalidInput& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
    return parse_config(j);
}

json to_json(const RunConfig& c) {
    json bases = json::array();
    for (const auto& b : c.continuation_bases) {
        json modes = json::array();
        for (const auto& [a, bb] : b.modes) modes.push_back({a, bb});
        bases.push_back({{"modes", modes}, {"r", b.r}});
    }
    return {{"model", model_json(c.model)},
            {"derivative_model", c.derivative_model ? model_json(*c.derivative_model) : json(nullptr)},
            {"k_grid", c.k_grid},
            {"spectrum_k_grid", c.spectrum_k_grid},
            {"kernel_k_grid", c.kernel_k_grid},
            {"kernel_check_k", c.kernel_check_k},
            {"spectrum_cap", c.spectrum_cap ? json(*c.spectrum_cap) : json(nullptr)},
            {"moment_order", c.moment_order},
            {"samples",
             {{"scheme", to_string(c.scheme)},
              {"count", c.sample_count},
              {"quasi_random_count", c.quasi_random_count},
              {"pair_count", c.pair_count},
              {"solver_pairs", c.solver_pairs},
              {"seed", c.seed}}},
            {"tolerances",
             {{"solve", c.tolerances.solve},
              {"certificate", c.tolerances.certificate},
              {"invariant", c.tolerances.invariant},
              {"equivariance", c.tolerances.equivariance},
              {"window", c.tolerances.window},
              {"example", c.tolerances.example}}},
            {"example", {{"epsilons", c.example_epsilons}}},
            {"continuation",
             {{"epsilon", c.continuation_epsilon}, {"directions", c.continuation_directions}, {"bases", bases}}},
            {"out_dir", c.out_dir},
            {"jobs", c.jobs}};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string CsvTable::render() const {
    std::string s;
    const auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        s += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return s;
}

const CriterionResult* RunOutput::criterion(int id) const {
    for (const auto& c : criteria) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

namespace {

void run_sections(const std::string& sub, Runner& r) {
    if (sub == "spectrum") {
        r.spectrum();
    } else if (sub == "kernel") {
        r.kernel();
    } else if (sub == "embed") {
        r.embed();
    } else if (sub == "deform") {
        r.embed();
        r.deform();
    } else if (sub == "continue") {
        r.continuation();
    } else if (sub == "example") {
        r.example();
    } else if (sub == "rates") {
        r.rates();
    } else if (sub == "all") {
        r.rates();
        r.deform();
        r.example();
        r.continuation();
        r.solver_check();
    } else if (sub == "all-tables") {
        r.spectrum();
        r.kernel();
        r.embed();
        r.deform();
    } else {
        throw ConfigError("unknown subcommand '" + sub + "'");
    }
}

std::map<std::string, std::string> render_tables(const RunOutput& out) {
    std::map<std::string, std::string> m;
    for (const auto& t : out.tables) m[t.file] = t.render();
    return m;
}

}  // namespace

RunOutput run(const std::string& subcommand, const RunConfig& config) {
    RunOutput out;
    out.report = {{"tool", "crlab"},
                  {"version", kVersion},
                  {"subcommand", subcommand},
                  {"seed", config.seed},
                  {"environment", {{"jobs", config.jobs}, {"compiler", __VERSION__}, {"cplusplus", __cplusplus}}},
                  {"config", to_json(config)}};
    Runner runner(config, out);
    run_sections(subcommand, runner);

    if (subcommand == "all") {
        // 11: Newton against bisection, then a second independent run for byte-identical tables.
        const double gap = out.report["solver"]["max_newton_bisection_gap"].get<double>();
        RunOutput again;
        Runner second(config, again);
        run_sections("all-tables", second);
        const bool same = render_tables(out) == render_tables(again);
        out.criteria.push_back({11,
                                "solver correctness and determinism",
                                gap <= 1e-12 && same,
                                {{"max_newton_bisection_gap", gap},
                                 {"pairs", config.solver_pairs},
                                 {"tables_identical_on_rerun", same}},
                                true});
    }

    std::sort(out.criteria.begin(), out.criteria.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    json crit = json::array();
    bool all = true;
    for (const auto& c : out.criteria) {
        crit.push_back({{"id", c.id}, {"name", c.name}, {"status", c.status()}, {"details", c.details}});
        all = all && (c.pass || !c.applicable);
    }
    out.report["criteria"] = crit;
    out.report["all_pass"] = all;
    return out;
}

void write_outputs(const RunOutput& out, const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& t : out.tables) {
        std::ofstream f(std::filesystem::path(dir) / t.file, std::ios::binary);
        f << t.render();
        if (!f) throw std::runtime_error("cannot write " + t.file);
    }
    std::ofstream f(std::filesystem::path(dir) / "report.json", std::ios::binary);
    f << out.report.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write report.json");
}

json error_record(const std::exception& e, const std::string& subcommand) {
    std::string kind = "internal";
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidInput*>(&e)) {
        kind = "config";
    } else if (dynamic_cast<const TruncationError*>(&e)) {
        kind = "spectrum-cap";
    } else if (dynamic_cast<const numerics::BracketError*>(&e) || dynamic_cast<const ContinuationFailure*>(&e) ||
               dynamic_cast<const EmbeddingFailure*>(&e)) {
        kind = "solver";
    }
    return {{"error", {{"kind", kind}, {"subcommand", subcommand}, {"message", e.what()}}}};
}

int exit_status(const std::exception& e) {
    const std::string kind = error_record(e, "")["error"]["kind"].get<std::string>();
    if (kind == "config") return 2;
    if (kind == "spectrum-cap") return 3;
    if (kind == "solver") return 4;
    return 1;
}

}  // namespace crlab::app
