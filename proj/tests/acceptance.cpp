// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gbrs/gbrs.hpp"
#include "support.hpp"

using namespace gbrs;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

DecisionSystem dataset(const std::string& name) { return load_csv(std::string(GBRS_DATA_DIR) + "/" + name + ".csv"); }

// 1. degenerate balls reproduce the value-equality positive region on every subset
Outcome oracle_equivalence()
{
    auto start = Clock::now();
    std::mt19937_64 rng(101);
    std::size_t checks = 0, mismatches = 0;
    for (int t = 0; t < 200; ++t) {
        std::size_t n = 1 + rng() % 12, d = 1 + rng() % 4;
        int levels = 2 + static_cast<int>(rng() % 3), classes = 1 + static_cast<int>(rng() % 3);
        auto ds = testing_support::random_discrete(rng, n, d, levels, classes);
        for (const auto& s : testing_support::all_subsets(d)) {
            AttributeSubset B(s, d);
            ++checks;
            if (positive_region(ds, B, Oracle::gbprs()).positive != prs_positive_region(ds, B).positive) ++mismatches;
        }
    }
    double secs = seconds_since(start);
    return {mismatches == 0 && secs < 30.0, std::to_string(checks) + " subset checks, " + std::to_string(mismatches) +
                                                " mismatches, " + fmt("%.2f s", secs) + " (limit 30 s)"};
}

// 2. partition, purity/size and no heterogeneous overlap after the full pipeline
Outcome ball_postconditions()
{
    auto start = Clock::now();
    std::mt19937_64 rng(202);
    std::size_t violations = 0, balls = 0;
    for (int t = 0; t < 50; ++t) {
        std::size_t n = 20 + rng() % 481, d = 1 + rng() % 5, lbs = 2 + rng() % 9;
        auto ds = testing_support::random_continuous(rng, n, d, 2 + static_cast<int>(rng() % 3));
        auto bs = granulate(ds, AttributeSubset::all(d), BallOptions{lbs});
        balls += bs.balls.size();
        std::vector<int> seen(n, 0);
        for (const auto& b : bs.balls) {
            for (std::size_t i : b.members) ++seen[i];
            if (!(b.pure() || b.size() <= lbs)) ++violations;
        }
        for (int c : seen)
            if (c != 1) ++violations;
        for (std::size_t i = 0; i < bs.balls.size(); ++i)
            for (std::size_t j = i + 1; j < bs.balls.size(); ++j) {
                const auto &p = bs.balls[i], &q = bs.balls[j];
                if (p.label != q.label && p.size() > 1 && q.size() > 1 && boundary_distance(p, q) < 0.0) ++violations;
            }
    }
    double secs = seconds_since(start);
    return {violations == 0 && secs < 60.0, "50 datasets, " + std::to_string(balls) + " balls, " +
                                                std::to_string(violations) + " violations, " + fmt("%.2f s", secs) +
                                                " (limit 60 s)"};
}

// 3. greedy gamma trace equals the exhaustive subset table along the greedy path
Outcome greedy_path()
{
    std::mt19937_64 rng(303);
    std::size_t runs = 0, bad = 0;
    for (int t = 0; t < 60; ++t) {
        auto ds = t % 2 ? testing_support::random_continuous(rng, 20 + rng() % 60, 3, 2 + static_cast<int>(rng() % 2))
                        : testing_support::random_discrete(rng, 10 + rng() % 30, 3, 3, 2);
        for (Oracle o : {Oracle::prs(), Oracle::nrs(0.15), Oracle::gbnrs(3), Oracle::gbprs()}) {
            ++runs;
            std::map<std::vector<std::size_t>, double> table;
            for (const auto& s : testing_support::all_subsets(3)) table[s] = gamma(ds, AttributeSubset(s, 3), o);
            auto red = forward_reduction(ds, o);
            std::vector<std::size_t> path;
            double prev = 0.0;
            bool ok = true;
            for (std::size_t k = 0; k < red.selected.size(); ++k) {
                path.push_back(red.selected[k]);
                auto key = path;
                std::sort(key.begin(), key.end());
                ok = ok && std::abs(table[key] - red.gamma_trace[k]) <= 1e-12 && red.gamma_trace[k] > prev;
                // no other candidate had a strictly larger gain, nor an equal gain at a smaller index
                for (std::size_t a = 0; a < 3; ++a) {
                    if (std::find(path.begin(), path.end(), a) != path.end()) continue;
                    auto alt = path;
                    alt.back() = a;
                    std::sort(alt.begin(), alt.end());
                    double g = table[alt];
                    ok = ok && (g < red.gamma_trace[k] || (g == red.gamma_trace[k] && a > red.selected[k]));
                }
                prev = red.gamma_trace[k];
            }
            // stopping: no remaining attribute improves gamma
            for (std::size_t a = 0; a < 3; ++a) {
                if (std::find(path.begin(), path.end(), a) != path.end()) continue;
                auto alt = path;
                alt.push_back(a);
                std::sort(alt.begin(), alt.end());
                ok = ok && table[alt] - prev <= 0.0;
            }
            if (!ok) ++bad;
        }
    }
    return {bad == 0, std::to_string(runs) + " greedy runs over 4 oracles, " + std::to_string(bad) + " deviations"};
}

// 4. NRS shrinks with delta, PRS grows with B
Outcome monotonicity()
{
    std::mt19937_64 rng(404);
    std::size_t bad_nrs = 0, bad_prs = 0;
    for (int t = 0; t < 100; ++t) {
        std::size_t d = 1 + rng() % 4;
        auto ds = testing_support::random_continuous(rng, 10 + rng() % 90, d, 2 + static_cast<int>(rng() % 2));
        AttributeSubset B = AttributeSubset::all(d);
        std::uniform_real_distribution<double> u(0.0, 0.5);
        double d1 = u(rng), d2 = u(rng);
        if (d1 > d2) std::swap(d1, d2);
        auto p1 = testing_support::as_set(nrs_positive_region(ds, B, d1).positive);
        auto p2 = testing_support::as_set(nrs_positive_region(ds, B, d2).positive);
        if (!std::includes(p1.begin(), p1.end(), p2.begin(), p2.end())) ++bad_nrs;
    }
    for (int t = 0; t < 100; ++t) {
        std::size_t d = 2 + rng() % 3;
        auto ds = testing_support::random_discrete(rng, 5 + rng() % 30, d, 3, 2 + static_cast<int>(rng() % 2));
        auto subsets = testing_support::all_subsets(d);
        const auto& s = subsets[rng() % subsets.size()];
        AttributeSubset B1(s, d);
        AttributeSubset B2 = B1;
        for (std::size_t a = 0; a < d; ++a)
            if (!B2.contains(a) && rng() % 2) B2 = B2.with(a);
        auto p1 = testing_support::as_set(prs_positive_region(ds, B1).positive);
        auto p2 = testing_support::as_set(prs_positive_region(ds, B2).positive);
        if (!std::includes(p2.begin(), p2.end(), p1.begin(), p1.end())) ++bad_prs;
    }
    return {bad_nrs == 0 && bad_prs == 0, "NRS delta violations " + std::to_string(bad_nrs) + "/100, PRS subset violations " +
                                              std::to_string(bad_prs) + "/100"};
}

struct Reproduction {
    std::string name;
    double target;
    double tolerance; // 0 means exact
    SweepResult sweep;
    double seconds = 0.0;
};

std::vector<Reproduction> reproductions;

// 5. GBNRS with the LBS sweep on the published datasets
Outcome paper_numbers()
{
    EvalConfig cfg; // 5 folds, 1-NN, seed 0, per-fold reduction
    reproductions = {{"mushroom", 1.0, 0.0, {}},
                     {"zoo", 0.95, 0.05, {}},
                     {"wine", 0.9773, 0.05, {}},
                     {"diabetes", 0.7471, 0.05, {}}};
    bool pass = true;
    std::string detail;
    for (auto& r : reproductions) {
        auto start = Clock::now();
        r.sweep = lbs_sweep(dataset(r.name), cfg);
        r.seconds = seconds_since(start);
        double m = r.sweep.best_report.mean;
        bool ok = (r.tolerance == 0.0 ? m == r.target : std::abs(m - r.target) <= r.tolerance) && r.seconds < 600.0;
        pass = pass && ok;
        detail += r.name + " " + mean_pm_std(m, r.sweep.best_report.std) + " (target " + fmt("%.4f", r.target) +
                  (r.tolerance == 0.0 ? " exact" : " +-0.05") + ", lbs=" +
                  std::to_string(static_cast<std::size_t>(r.sweep.best_value)) + ", " + fmt("%.1f s", r.seconds) +
                  (ok ? ")" : ", OUT)") + "; ";
    }
    return {pass, detail};
}

// 6. GBNRS beats PRS on average over the discrete datasets at hand
Outcome directional()
{
    EvalConfig cfg;
    double gb = 0.0, prs = 0.0;
    std::string detail;
    const std::vector<std::string> names{"zoo", "mushroom"};
    for (const auto& name : names) {
        auto ds = dataset(name);
        double g = -1.0;
        for (const auto& r : reproductions)
            if (r.name == name) g = r.sweep.best_report.mean;
        if (g < 0.0) g = lbs_sweep(ds, cfg).best_report.mean;
        double p = evaluate_method(ds, Method::prs, cfg).mean;
        gb += g;
        prs += p;
        detail += name + " GBNRS " + fmt("%.4f", g) + " PRS " + fmt("%.4f", p) + "; ";
    }
    gb /= static_cast<double>(names.size());
    prs /= static_cast<double>(names.size());
    detail += "mean GBNRS " + fmt("%.4f", gb) + " vs PRS " + fmt("%.4f", prs) + " (strict > required)";
    return {gb > prs, detail};
}

// 7. a second run of criterion 5 serializes byte-identically
Outcome determinism()
{
    EvalConfig cfg;
    std::size_t same = 0;
    for (const auto& r : reproductions) {
        auto ds = dataset(r.name);
        auto again = lbs_sweep(ds, cfg);
        if (to_json(again, ds).dump() == to_json(r.sweep, ds).dump()) ++same;
    }
    return {same == reproductions.size() && !reproductions.empty(),
            std::to_string(same) + "/" + std::to_string(reproductions.size()) + " sweep reports byte-identical"};
}

// 8. tree classifies its positive training samples correctly and matches the ball positive region per layer
Outcome tree_consistency()
{
    bool pass = true;
    std::string detail;
    for (const std::string name : {"zoo", "wine"}) {
        auto raw = dataset(name);
        auto ds = normalize(raw);
        std::size_t lbs = 2;
        for (const auto& r : reproductions)
            if (r.name == name) lbs = static_cast<std::size_t>(r.sweep.best_value);
        Oracle o = Oracle::gbnrs(lbs);
        auto red = forward_reduction(ds, o);
        auto tree = build_tree(ds, red, o.balls);

        std::size_t positives = 0, correct = 0;
        for (const auto& nd : tree.nodes) {
            if (nd.kind != NodeKind::positive) continue;
            for (std::size_t i : nd.extent) {
                ++positives;
                if (classify(tree, ds.row(i)).label == ds.label(i)) ++correct;
            }
        }

        std::size_t layers_ok = 0;
        std::vector<std::size_t> reaching; // empty: all of U
        for (std::size_t layer = 1; layer <= tree.layer_count(); ++layer) {
            std::vector<std::size_t> from_tree, next;
            for (const auto& nd : tree.nodes) {
                if (nd.layer != layer) continue;
                auto& dst = nd.kind == NodeKind::positive ? from_tree : next;
                dst.insert(dst.end(), nd.extent.begin(), nd.extent.end());
            }
            std::sort(from_tree.begin(), from_tree.end());
            std::sort(next.begin(), next.end());
            if (layer > 1 && reaching.empty()) {
                layers_ok += from_tree.empty();
                continue;
            }
            auto region = gbrs_positive_region(granulate(ds, red.selected.prefix(layer), o.balls, reaching), ds);
            layers_ok += region.positive == from_tree;
            reaching = next;
        }
        bool ok = positives > 0 && correct == positives && layers_ok == tree.layer_count();
        pass = pass && ok;
        detail += name + ": " + std::to_string(correct) + "/" + std::to_string(positives) +
                  " positive training samples self-classified, " + std::to_string(layers_ok) + "/" +
                  std::to_string(tree.layer_count()) + " layers match (lbs=" + std::to_string(lbs) + "); ";
    }
    return {pass, detail};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 oracle equivalence (gbprs == prs)", oracle_equivalence},
        {"2 ball pipeline postconditions", ball_postconditions},
        {"3 greedy path vs exhaustive gamma", greedy_path},
        {"4 NRS delta / PRS subset monotonicity", monotonicity},
        {"5 published accuracy reproduction", paper_numbers},
        {"6 GBNRS mean-of-means > PRS (discrete)", directional},
        {"7 determinism of reports", determinism},
        {"8 GBRCT consistency", tree_consistency},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures ? 1 : 0;
}
