// Command-line surface: sampling, figure emission, statistics reports and
// coupling runs. Exit codes: 0 success / statistical pass, 2 statistical
// rejection, 1 operational error.

#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latinv/coupling.hpp"
#include "latinv/gowers.hpp"
#include "latinv/io.hpp"
#include "latinv/stats.hpp"
#include "latinv/version.hpp"

using namespace latinv;

namespace {

constexpr int kExitError = 1;
constexpr int kExitRejected = 2;

uint64_t default_seed() {
    if (const char* env = std::getenv("LATINV_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

std::vector<int64_t> parse_i64_list(const std::string& text, char sep) {
    std::vector<int64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, sep)) {
        if (tok.empty()) continue;
        out.push_back(std::stoll(tok));
    }
    return out;
}

// "N" -> [0,N)^d; "a:b,c:d,..." -> explicit half-open ranges. Processes
// without an intrinsic dimension (bernoulli, periodic) default to d = 2.
Box parse_box(const std::string& text, int dim_hint) {
    if (text.find(':') == std::string::npos) {
        const int64_t n = std::stoll(text);
        return Box::cube(dim_hint >= 1 ? dim_hint : 2, n);
    }
    std::vector<int64_t> lo, hi;
    std::stringstream ss(text);
    std::string range;
    while (std::getline(ss, range, ',')) {
        const size_t colon = range.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("bad box range: " + range);
        lo.push_back(std::stoll(range.substr(0, colon)));
        hi.push_back(std::stoll(range.substr(colon + 1)));
    }
    return Box(std::move(lo), std::move(hi));
}

// "x,y;x,y;..."
std::vector<LatticePoint> parse_points(const std::string& text) {
    std::vector<LatticePoint> pts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
        if (tok.empty()) continue;
        pts.push_back(parse_i64_list(tok, ','));
    }
    return pts;
}

struct SpecSource {
    std::string preset;
    std::string config_path;
    uint64_t seed = default_seed();
    bool seed_given = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--preset", preset,
                        "named process (s1, s2, s3, poly:<d>,<k>,<delta>, bernoulli:<p>, "
                        "periodic:<n>, cutproject-s1)");
        cmd->add_option("--config", config_path, "process config file (TOML or JSON)");
        cmd->add_option("--seed", seed, "overrides the config seed")->each([this](std::string) {
            seed_given = true;
        });
    }

    ProcessSpec resolve() const {
        if (!preset.empty() && !config_path.empty())
            throw std::invalid_argument("pass either --preset or --config, not both");
        ProcessSpec spec;
        if (!preset.empty()) {
            spec = spec_from_preset(preset, seed);
        } else if (!config_path.empty()) {
            spec = spec_from_json(load_config_file(config_path));
            if (seed_given) spec.seed = seed;
        } else {
            throw std::invalid_argument("need --preset or --config");
        }
        return spec;
    }
};

void emit_report(const json& report, const std::string& out_path) {
    const std::string text = report.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text);
}

AffineMap parse_group_element(const std::string& text, int d) {
    if (text.rfind("word:", 0) == 0) {
        // word:<len>:<seed>
        int len = 0;
        unsigned long long seed = 0;
        if (std::sscanf(text.c_str() + 5, "%d:%llu", &len, &seed) != 2)
            throw std::invalid_argument("expected word:<len>:<seed>, got " + text);
        rng::Stream s(seed);
        return random_element(d, len, s);
    }
    return affine_preset(text, d);
}

// --- subcommand implementations ---------------------------------------------

int run_sample(const SpecSource& src, const std::string& box_text, const std::string& out_pbm,
               const std::string& out_csv, const std::string& out_raw, int slice_axis,
               int64_t slice_at) {
    const ProcessSpec spec = src.resolve();
    const json cfg = spec_to_json(spec);
    const uint64_t h = config_hash(cfg);
    const Box box = parse_box(box_text, spec.dim_hint());
    const PointSet ps = sample(spec, box);

    const std::string meta = meta_comment(spec.seed, h);
    if (!out_pbm.empty()) {
        const PointSet flat = box.dim() == 2 ? ps : slice2d(ps, slice_axis, slice_at);
        write_file(out_pbm, pbm_bytes(flat, meta));
    }
    if (!out_csv.empty()) write_file(out_csv, csv_points_bytes(ps, meta));
    if (!out_raw.empty()) write_file(out_raw, raw_grid_bytes(ps, spec.seed, h));

    const Estimate e = intensity(ps);
    std::cout << "points " << ps.cardinality() << " of " << box.volume() << "  intensity "
              << e.value << " +- " << e.std_error << "  (" << meta << ")\n";
    return 0;
}

int run_figure_panel(const std::vector<std::string>& panels, const std::string& box_text,
                     uint64_t seed, const std::string& out_path) {
    if (panels.empty()) throw std::invalid_argument("figure-panel: no --panel entries");
    // each panel is <preset>@<seed>
    std::vector<ProcessSpec> specs;
    json panel_desc = json::array();
    for (const auto& p : panels) {
        const size_t at = p.rfind('@');
        if (at == std::string::npos)
            throw std::invalid_argument("panel entry must be <preset>@<seed>: " + p);
        const std::string name = p.substr(0, at);
        const uint64_t pseed = std::stoull(p.substr(at + 1));
        specs.push_back(spec_from_preset(name, pseed));
        panel_desc.push_back(json{{"preset", name}, {"seed", pseed}});
    }
    json cfg{{"panels", panel_desc}, {"seed", seed}};
    const uint64_t h = config_hash(cfg);

    // deterministic shuffle of the display order, recorded in the sidecar
    std::vector<size_t> order(specs.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng::Stream shuffle(rng::derive(seed, 0x70616E6Cull));
    for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[shuffle.next_below(i)]);

    std::vector<PointSet> sets;
    for (size_t idx : order) {
        const ProcessSpec& spec = specs[idx];
        sets.push_back(sample(spec, parse_box(box_text, spec.dim_hint())));
    }
    write_file(out_path, panel_pbm_bytes(sets, meta_comment(seed, h)));

    json sidecar = report_skeleton("figure-panel", seed, cfg);
    sidecar["display_order"] = order; // display_order[i] = index into panels
    emit_report(sidecar, out_path + ".json");
    std::cout << "wrote " << out_path << " and " << out_path << ".json\n";
    return 0;
}

int run_intensity(const SpecSource& src, const std::string& box_text, uint64_t seeds,
                  const std::string& out_path) {
    const ProcessSpec spec = src.resolve();
    const Box box = parse_box(box_text, spec.dim_hint());
    std::vector<double> vals;
    for (uint64_t i = 0; i < seeds; ++i)
        vals.push_back(intensity(sample_with_seed(spec, box, rng::trial_seed(spec.seed, i))).value);
    json rep = report_skeleton("stats intensity", spec.seed, spec_to_json(spec));
    rep["box"] = box_to_json(box);
    rep["per_seed"] = vals;
    rep["mean"] = mean_of(vals);
    if (vals.size() >= 2) rep["std_error"] = stddev_of(vals) / std::sqrt(double(vals.size()));
    emit_report(rep, out_path);
    return 0;
}

int run_marginal(const SpecSource& src, const std::string& points_text, uint64_t trials,
                 const std::string& out_path) {
    const ProcessSpec spec = src.resolve();
    const MarginalQuery q(parse_points(points_text));
    const auto est = k_point_marginal(spec, q, trials, spec.seed);
    json rep = report_skeleton("stats marginal", spec.seed, spec_to_json(spec));
    rep["points"] = q.points;
    rep["trials"] = trials;
    rep["successes"] = est.successes;
    rep["estimate"] = est.p_hat();
    rep["wilson95"] = json::array({est.ci.lo, est.ci.hi});
    emit_report(rep, out_path);
    return 0;
}

int run_gowers(const SpecSource& src, const std::string& box_text, int order,
               const std::string& shift_text, const std::string& mode, uint64_t samples,
               const std::string& out_path) {
    const ProcessSpec spec = src.resolve();
    const Box box = parse_box(box_text, spec.dim_hint());
    GowersConfig cfg;
    cfg.order = order;
    cfg.base = box;
    cfg.shift = parse_box(shift_text, box.dim());
    cfg.samples = samples;
    if (mode == "exact") cfg.mode = GowersConfig::Mode::Exact;
    else if (mode == "mc") cfg.mode = GowersConfig::Mode::MonteCarlo;
    else throw std::invalid_argument("gowers mode must be exact or mc");

    const GridFn f = GridFn::indicator(sample(spec, box));
    const double value = gowers_norm(f, cfg, spec.seed);
    json rep = report_skeleton("stats gowers", spec.seed, spec_to_json(spec));
    rep["order"] = order;
    rep["box"] = box_to_json(box);
    rep["shift"] = box_to_json(cfg.shift);
    rep["mode"] = mode;
    rep["value"] = value;
    emit_report(rep, out_path);
    return 0;
}

int run_ap(const SpecSource& src, int L, uint64_t trials, const std::string& box_text,
           int64_t max_step, const std::string& against, double alpha,
           const std::string& out_path) {
    const ProcessSpec spec = src.resolve();
    ApEnsemble ens{parse_box(box_text, spec.dim_hint()), max_step};
    const Histogram h = ap_count_distribution(spec, L, trials, ens, spec.seed);

    json rep = report_skeleton("stats ap", spec.seed, spec_to_json(spec));
    rep["L"] = L;
    rep["trials"] = trials;
    rep["box"] = box_to_json(ens.box);
    rep["max_step"] = max_step;
    rep["bins"] = h.bins;

    int exit_code = 0;
    if (!against.empty()) {
        const ProcessSpec other = spec_from_preset(against, spec.seed + 1);
        const Histogram h2 = ap_count_distribution(other, L, trials, ens, other.seed);
        const ChiSq test = two_sample_chisq(h, h2);
        rep["against"] = against;
        rep["against_bins"] = h2.bins;
        rep["chi_square"] = json{{"statistic", test.statistic},
                                 {"dof", test.dof},
                                 {"p_value", test.p_value},
                                 {"alpha", alpha},
                                 {"rejected", test.p_value < alpha}};
        if (test.p_value < alpha) exit_code = kExitRejected;
    }
    emit_report(rep, out_path);
    return exit_code;
}

int run_invariance(const SpecSource& src, const std::string& g_text,
                   const std::string& queries_text, uint64_t trials, double alpha,
                   const std::string& out_path) {
    const ProcessSpec spec = src.resolve();
    const int d = spec.dim_hint() > 0 ? spec.dim_hint() : 2;
    const AffineMap g = parse_group_element(g_text, d);

    std::vector<MarginalQuery> queries;
    std::stringstream ss(queries_text);
    std::string group;
    while (std::getline(ss, group, '|'))
        if (!group.empty()) queries.emplace_back(parse_points(group));
    if (queries.empty()) throw std::invalid_argument("invariance: no queries given");

    const auto rep = invariance_test(spec, g, queries, trials, alpha, spec.seed);
    json out = report_skeleton("stats invariance", spec.seed, spec_to_json(spec));
    out["g"] = affine_to_json(g);
    out["alpha"] = alpha;
    out["trials"] = trials;
    json qs = json::array();
    for (const auto& q : rep.queries) {
        qs.push_back(json{{"points", q.query.points},
                          {"estimate", q.at_f.p_hat()},
                          {"estimate_image", q.at_gf.p_hat()},
                          {"p_value", q.p_value},
                          {"p_holm", q.p_holm},
                          {"pass", q.pass}});
    }
    out["queries"] = qs;
    out["all_pass"] = rep.all_pass;
    emit_report(out, out_path);
    return rep.all_pass ? 0 : kExitRejected;
}

int run_couple(const SpecSource& src, const std::string& f1_text, const std::string& f2_text,
               const std::string& box_text, uint64_t seeds, const std::string& mode_text,
               const std::string& out_path) {
    const ProcessSpec spec = src.resolve();
    const auto* poly = std::get_if<PolynomialSpec>(&spec.root.v);
    if (!poly)
        throw std::invalid_argument("couple run needs a polynomial core (preset s1/s2/s3 or a "
                                    "polynomial config)");
    const WindowFn f1 = window_from_json(json::parse(f1_text));
    const WindowFn f2 = window_from_json(json::parse(f2_text));
    const Box box = parse_box(box_text, poly->d);
    const CouplingMode mode = mode_text == "twostep" ? CouplingMode::TwoStep
                                                     : CouplingMode::SharedUniform;

    std::vector<double> densities;
    for (uint64_t i = 0; i < seeds; ++i) {
        const CoupledPair pair =
            couple_thinnings(*poly, f1, f2, box, rng::trial_seed(spec.seed, i), mode);
        densities.push_back(symdiff_density(pair).value);
    }

    // window gap norms by midpoint quadrature on the coefficient torus
    const int m = poly->m;
    long double l1 = 0, l2sq = 0;
    const int grid = m == 1 ? (1 << 16) : (1 << 8);
    uint64_t cells = 1;
    for (int i = 0; i < m; ++i) cells *= uint64_t(grid);
    for (uint64_t c = 0; c < cells; ++c) {
        TorusVec x{size_t(m)};
        uint64_t rest = c;
        for (int i = 0; i < m; ++i) {
            x[size_t(i)] = t_from_unit((long double)(rest % grid + 0.5L) / grid);
            rest /= grid;
        }
        const long double diff = std::fabs((long double)f1.eval(x).unit() - f2.eval(x).unit());
        l1 += diff;
        l2sq += diff * diff;
    }
    l1 /= cells;
    l2sq /= cells;

    json rep = report_skeleton("couple run", spec.seed, spec_to_json(spec));
    rep["f1"] = window_to_json(f1);
    rep["f2"] = window_to_json(f2);
    rep["box"] = box_to_json(box);
    rep["mode"] = mode == CouplingMode::TwoStep ? "twostep" : "shared";
    rep["per_seed"] = densities;
    rep["density"] = mean_of(densities);
    rep["l1_gap"] = double(l1);
    rep["l2_bound"] = double(std::sqrt(l2sq));
    emit_report(rep, out_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"invariant lattice point processes: samplers, statistics, couplings"};
    app.set_version_flag("--version", std::string(kVersion));
    int threads = 0;
    app.add_option("--threads", threads, "cap OpenMP parallelism (default: all cores)");

    std::string box_text = "64", out_pbm, out_csv, out_raw, out_path;
    int slice_axis = 0;
    int64_t slice_at = 0;

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "draw one realization and export it");
    SpecSource sample_src;
    sample_src.attach(sample_cmd);
    sample_cmd->add_option("--box", box_text, "box: N for [0,N)^d or a:b,c:d per axis");
    sample_cmd->add_option("--out-pbm", out_pbm, "write a PBM P4 raster (2-D or slice)");
    sample_cmd->add_option("--out-csv", out_csv, "write a CSV point list");
    sample_cmd->add_option("--out-raw", out_raw, "write the raw bit grid");
    sample_cmd->add_option("--slice-axis", slice_axis, "axis to fix when rasterizing d>2");
    sample_cmd->add_option("--slice-at", slice_at, "coordinate of the raster slice");

    // figure-panel
    auto* panel_cmd = app.add_subcommand("figure-panel", "side-by-side composite with shuffled order");
    std::vector<std::string> panel_entries;
    uint64_t panel_seed = default_seed();
    std::string panel_box = "64", panel_out = "panel.pbm";
    panel_cmd->add_option("--panel", panel_entries, "<preset>@<seed>, repeatable")->required();
    panel_cmd->add_option("--box", panel_box, "shared box for every panel");
    panel_cmd->add_option("--seed", panel_seed, "shuffle seed");
    panel_cmd->add_option("--out", panel_out, "output PBM (sidecar <out>.json)");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "estimators and statistical tests");
    stats_cmd->require_subcommand(1);

    auto* int_cmd = stats_cmd->add_subcommand("intensity", "box density across seeds");
    SpecSource int_src;
    int_src.attach(int_cmd);
    std::string int_box = "64";
    uint64_t int_seeds = 20;
    std::string int_out;
    int_cmd->add_option("--box", int_box);
    int_cmd->add_option("--seeds", int_seeds, "number of independent realizations");
    int_cmd->add_option("--out", int_out, "report path (default stdout)");

    auto* marg_cmd = stats_cmd->add_subcommand("marginal", "P(F in sample) with Wilson CI");
    SpecSource marg_src;
    marg_src.attach(marg_cmd);
    std::string marg_points = "0,0";
    uint64_t marg_trials = 100000;
    std::string marg_out;
    marg_cmd->add_option("--points", marg_points, "query points x,y;x,y;...");
    marg_cmd->add_option("--trials", marg_trials);
    marg_cmd->add_option("--out", marg_out);

    auto* gow_cmd = stats_cmd->add_subcommand("gowers", "uniformity norm of a sampled indicator");
    SpecSource gow_src;
    gow_src.attach(gow_cmd);
    std::string gow_box = "32", gow_shift = "8", gow_mode = "exact", gow_out;
    int gow_order = 2;
    uint64_t gow_samples = 100000;
    gow_cmd->add_option("--box", gow_box);
    gow_cmd->add_option("--order", gow_order, "norm order k");
    gow_cmd->add_option("--shift", gow_shift, "shift box for the cube sides");
    gow_cmd->add_option("--mode", gow_mode, "exact or mc");
    gow_cmd->add_option("--samples", gow_samples, "monte-carlo sample count");
    gow_cmd->add_option("--out", gow_out);

    auto* ap_cmd = stats_cmd->add_subcommand("ap", "arithmetic-progression count histogram");
    SpecSource ap_src;
    ap_src.attach(ap_cmd);
    std::string ap_box = "64", ap_against, ap_out;
    int ap_L = 8;
    uint64_t ap_trials = 100000;
    int64_t ap_max_step = 3;
    double ap_alpha = 0.01;
    ap_cmd->add_option("--L", ap_L, "progression length");
    ap_cmd->add_option("--trials", ap_trials);
    ap_cmd->add_option("--box", ap_box);
    ap_cmd->add_option("--max-step", ap_max_step);
    ap_cmd->add_option("--against", ap_against, "preset to compare against (chi-square)");
    ap_cmd->add_option("--alpha", ap_alpha);
    ap_cmd->add_option("--out", ap_out);

    auto* inv_cmd = stats_cmd->add_subcommand("invariance", "marginal comparison under a group element");
    SpecSource inv_src;
    inv_src.attach(inv_cmd);
    std::string inv_g = "shear-12", inv_queries = "0,0|0,0;1,0", inv_out;
    uint64_t inv_trials = 100000;
    double inv_alpha = 0.01;
    inv_cmd->add_option("--g", inv_g, "preset name or word:<len>:<seed>");
    inv_cmd->add_option("--queries", inv_queries, "query groups separated by |");
    inv_cmd->add_option("--trials", inv_trials);
    inv_cmd->add_option("--alpha", inv_alpha);
    inv_cmd->add_option("--out", inv_out);

    // couple
    auto* couple_cmd = app.add_subcommand("couple", "coupled thinnings of a shared draw");
    auto* couple_run = couple_cmd->add_subcommand("run", "sample a coupled pair per seed");
    SpecSource cpl_src;
    cpl_src.attach(couple_run);
    std::string cpl_f1 = R"({"box": [[0.0, 0.5]]})";
    std::string cpl_f2 = R"({"box": [[0.0, 0.6]]})";
    std::string cpl_box = "128", cpl_mode = "shared", cpl_out;
    uint64_t cpl_seeds = 10;
    couple_run->add_option("--f1", cpl_f1, "first window (JSON)");
    couple_run->add_option("--f2", cpl_f2, "second window (JSON)");
    couple_run->add_option("--box", cpl_box);
    couple_run->add_option("--seeds", cpl_seeds);
    couple_run->add_option("--mode", cpl_mode, "shared or twostep");
    couple_run->add_option("--out", cpl_out);

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (*sample_cmd)
            return run_sample(sample_src, box_text, out_pbm, out_csv, out_raw, slice_axis,
                              slice_at);
        if (*panel_cmd) return run_figure_panel(panel_entries, panel_box, panel_seed, panel_out);
        if (*int_cmd) return run_intensity(int_src, int_box, int_seeds, int_out);
        if (*marg_cmd) return run_marginal(marg_src, marg_points, marg_trials, marg_out);
        if (*gow_cmd)
            return run_gowers(gow_src, gow_box, gow_order, gow_shift, gow_mode, gow_samples,
                              gow_out);
        if (*ap_cmd)
            return run_ap(ap_src, ap_L, ap_trials, ap_box, ap_max_step, ap_against, ap_alpha,
                          ap_out);
        if (*inv_cmd)
            return run_invariance(inv_src, inv_g, inv_queries, inv_trials, inv_alpha, inv_out);
        if (*couple_run)
            return run_couple(cpl_src, cpl_f1, cpl_f2, cpl_box, cpl_seeds, cpl_mode, cpl_out);
        std::cerr << "no subcommand selected\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    (void)out_path;
}
