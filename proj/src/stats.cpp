#include "latinv/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace latinv {

Estimate intensity(const PointSet& s) {
    const uint64_t vol = uint64_t(s.box().volume());
    if (vol == 0) throw std::invalid_argument("intensity: empty box");
    const double p = double(s.cardinality()) / double(vol);
    return {p, std::sqrt(p * (1 - p) / double(vol)), vol};
}

MarginalQuery::MarginalQuery(std::vector<LatticePoint> pts) : points(std::move(pts)) {
    std::set<LatticePoint> unique(points.begin(), points.end());
    if (unique.size() != points.size())
        throw std::invalid_argument("MarginalQuery: points must be pairwise distinct");
    for (const auto& p : points)
        if (p.size() != points[0].size())
            throw std::invalid_argument("MarginalQuery: dimension mismatch");
}

MarginalEstimate k_point_marginal(const ProcessSpec& spec, const MarginalQuery& q,
                                  uint64_t trials, uint64_t seed) {
    if (trials == 0) throw std::invalid_argument("k_point_marginal: zero trials");
    uint64_t hits = 0;
    if (q.points.empty()) {
        hits = trials; // empty intersection condition is vacuous
    } else {
#pragma omp parallel for schedule(static) reduction(+ : hits)
        for (int64_t t = 0; t < int64_t(trials); ++t) {
            const auto bits = sample_membership(spec, rng::trial_seed(seed, uint64_t(t)), q.points);
            uint8_t all = 1;
            for (uint8_t b : bits) all &= b;
            hits += all;
        }
    }
    MarginalEstimate est;
    est.successes = hits;
    est.trials = trials;
    est.ci = wilson_ci(hits, trials, 1.959963984540054);
    return est;
}

void Histogram::merge(const Histogram& o) {
    if (bins.size() != o.bins.size()) throw std::invalid_argument("Histogram::merge: bin mismatch");
    for (size_t i = 0; i < bins.size(); ++i) bins[i] += o.bins[i];
    total += o.total;
}

namespace {

// Draws (base, step) for a length-L progression inside the box, uniform
// over steps with a nonempty admissible base range, then uniform over
// admissible bases.
bool draw_ap(const ApEnsemble& ens, int L, rng::Stream& s, LatticePoint& base,
             LatticePoint& step) {
    const int d = ens.box.dim();
    const int64_t R = ens.max_step;
    base.assign(size_t(d), 0);
    step.assign(size_t(d), 0);
    for (int attempt = 0; attempt < 4096; ++attempt) {
        bool zero = true, feasible = true;
        for (int i = 0; i < d; ++i) {
            step[size_t(i)] = int64_t(s.next_below(uint64_t(2 * R + 1))) - R;
            if (step[size_t(i)] != 0) zero = false;
        }
        if (zero) continue;
        for (int i = 0; i < d && feasible; ++i) {
            const int64_t span = (int64_t(L) - 1) * step[size_t(i)];
            const int64_t lo = ens.box.lo[size_t(i)] - std::min<int64_t>(0, span);
            const int64_t hi = ens.box.hi[size_t(i)] - std::max<int64_t>(0, span);
            if (lo >= hi) {
                feasible = false;
                break;
            }
            base[size_t(i)] = lo + int64_t(s.next_below(uint64_t(hi - lo)));
        }
        if (feasible) return true;
    }
    return false;
}

} // namespace

Histogram ap_count_distribution(const ProcessSpec& spec, int ap_length, uint64_t trials,
                                const ApEnsemble& ens, uint64_t seed) {
    if (ap_length < 1) throw std::invalid_argument("ap_count_distribution: L must be >= 1");
    // feasibility: the axis-aligned unit step must fit somewhere
    bool any = false;
    for (int i = 0; i < ens.box.dim(); ++i)
        if (ens.box.extent(i) >= ap_length) any = true;
    if (!any || ens.max_step < 1)
        throw StatError("ap_count_distribution: box too small for the requested progression");

    Histogram hist;
    hist.bins.assign(size_t(ap_length) + 1, 0);
    const std::optional<ApFastPath> fast = ApFastPath::create(spec);
    if (fast) {
        const auto* poly = std::get_if<PolynomialSpec>(&spec.root.v);
        check_monomial_range(ens.box.lo, ens.box.hi, poly->k);
    }

#pragma omp parallel
    {
        Histogram local;
        local.bins.assign(size_t(ap_length) + 1, 0);
        LatticePoint base, step;
        std::vector<LatticePoint> pts((size_t)(ap_length));
        std::vector<uint8_t> bits(size_t(ap_length), 0);
#pragma omp for schedule(static)
        for (int64_t t = 0; t < int64_t(trials); ++t) {
            const uint64_t tseed = rng::trial_seed(seed, uint64_t(t));
            rng::Stream shape(rng::derive(tseed, rng::tag::kApShape));
            if (!draw_ap(ens, ap_length, shape, base, step)) continue;
            if (fast) {
                fast->run(tseed, base, step, ap_length, bits.data());
            } else {
                for (int j = 0; j < ap_length; ++j) {
                    pts[size_t(j)].assign(base.begin(), base.end());
                    for (int i = 0; i < ens.box.dim(); ++i)
                        pts[size_t(j)][size_t(i)] += int64_t(j) * step[size_t(i)];
                }
                bits = sample_membership(spec, tseed, pts);
            }
            size_t count = 0;
            for (uint8_t b : bits) count += b;
            local.add(count);
        }
#pragma omp critical
        hist.merge(local);
    }
    return hist;
}

ChiSq two_sample_chisq(const Histogram& a, const Histogram& b) {
    if (a.bins.size() != b.bins.size())
        throw std::invalid_argument("two_sample_chisq: binning mismatch");
    if (a.total == 0 || b.total == 0) throw StatError("two_sample_chisq: empty histogram");
    const double na = double(a.total), nb = double(b.total);

    // pool adjacent bins until expected counts reach 5 on both sides
    std::vector<std::pair<double, double>> pooled;
    double ca = 0, cb = 0;
    for (size_t i = 0; i < a.bins.size(); ++i) {
        ca += double(a.bins[i]);
        cb += double(b.bins[i]);
        const double tot = ca + cb;
        if (na * tot / (na + nb) >= 5.0 && nb * tot / (na + nb) >= 5.0) {
            pooled.emplace_back(ca, cb);
            ca = cb = 0;
        }
    }
    if (ca + cb > 0) {
        if (!pooled.empty()) {
            pooled.back().first += ca;
            pooled.back().second += cb;
        } else {
            pooled.emplace_back(ca, cb);
        }
    }
    if (pooled.size() < 2) throw StatError("two_sample_chisq: insufficient counts after pooling");

    double stat = 0;
    for (const auto& [xa, xb] : pooled) {
        const double tot = xa + xb;
        const double ea = na * tot / (na + nb);
        const double eb = nb * tot / (na + nb);
        stat += (xa - ea) * (xa - ea) / ea + (xb - eb) * (xb - eb) / eb;
    }
    const int dof = int(pooled.size()) - 1;
    return {stat, dof, chisq_sf(stat, double(dof))};
}

InvarianceReport invariance_test(const ProcessSpec& spec, const AffineMap& g,
                                 std::span<const MarginalQuery> queries, uint64_t trials,
                                 double alpha, uint64_t seed) {
    InvarianceReport report;
    report.alpha = alpha;
    std::vector<double> pvals;
    uint64_t qi = 0;
    for (const auto& q : queries) {
        std::vector<LatticePoint> image;
        image.reserve(q.points.size());
        for (const auto& t : q.points) image.push_back(latinv::apply(g, t));
        MarginalQuery gq(image);

        QueryVerdict v{q, {}, {}, 1, 1, true};
        v.at_f = k_point_marginal(spec, q, trials, rng::derive(seed, 2 * qi + 1));
        v.at_gf = k_point_marginal(spec, gq, trials, rng::derive(seed, 2 * qi + 2));
        v.p_value =
            two_proportion_test(v.at_f.successes, trials, v.at_gf.successes, trials).p_value;
        pvals.push_back(v.p_value);
        report.queries.push_back(std::move(v));
        ++qi;
    }
    const auto adjusted = holm_adjust(pvals);
    for (size_t i = 0; i < report.queries.size(); ++i) {
        report.queries[i].p_holm = adjusted[i];
        report.queries[i].pass = adjusted[i] >= alpha;
        report.all_pass = report.all_pass && report.queries[i].pass;
    }
    return report;
}

} // namespace latinv
