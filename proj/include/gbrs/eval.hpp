#ifndef GBRS_EVAL_HPP
#define GBRS_EVAL_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gbrs/dataset.hpp"
#include "gbrs/gbrct.hpp"
#include "gbrs/granular_ball.hpp"
#include "gbrs/parallel.hpp"
#include "gbrs/roughset.hpp"

namespace gbrs {

enum class Method { original, prs, nrs, gbnrs, gbprs, gbrct };

inline std::string method_name(Method m)
{
    switch (m) {
    case Method::original: return "Original";
    case Method::prs: return "PRS";
    case Method::nrs: return "NRS";
    case Method::gbnrs: return "GBNRS";
    case Method::gbprs: return "GBPRS";
    case Method::gbrct: return "GBRCT";
    }
    return "?";
}

inline Method parse_method(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "original") return Method::original;
    if (s == "prs") return Method::prs;
    if (s == "nrs") return Method::nrs;
    if (s == "gbnrs") return Method::gbnrs;
    if (s == "gbprs") return Method::gbprs;
    if (s == "gbrct") return Method::gbrct;
    throw ContractViolation("unknown method '" + s + "'");
}

struct EvalConfig {
    std::size_t folds = 5;
    std::size_t knn_k = 1;
    std::uint64_t seed = 0;
    double stop_eps = 0.0;
    std::optional<std::size_t> lbs;  // unset: sweep 2d..2
    std::optional<double> delta;     // unset: sweep 0.01..0.50
    RadiusMode radius = RadiusMode::average;
    bool whole_dataset_reduction = false;
    std::size_t jobs = 1;
};

struct EvaluationReport {
    std::string dataset;
    std::string method;
    nlohmann::json parameters = nlohmann::json::object();
    std::vector<double> fold_accuracies;
    double mean = 0.0;
    double std = 0.0;
    std::vector<std::vector<std::size_t>> fold_selected;
    std::vector<std::string> flags;
    double seconds = 0.0; // wall clock; kept out of serialized reports
};

/// Majority label among the k nearest rows of `train` on B. Distance ties go
/// to the smaller sample id, vote ties to the smaller class id. An empty B
/// falls back to the training majority class.
inline int knn_classify(const DecisionSystem& train, const AttributeSubset& B,
                        std::span<const double> query, std::size_t k)
{
    require(train.size() > 0, "knn_classify: empty training set");
    require(k >= 1 && k <= train.size(), "knn_classify: k must be in [1, train size]");
    require(query.size() == train.attribute_count(), "knn_classify: query has wrong dimension");
    std::vector<std::size_t> votes(train.class_count(), 0);
    if (B.empty()) {
        for (int y : train.labels()) ++votes[static_cast<std::size_t>(y)];
    } else {
        std::vector<std::pair<double, std::size_t>> dist(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) {
            double s = 0.0;
            for (std::size_t a : B) {
                double t = train.value(i, a) - query[a];
                s += t * t;
            }
            dist[i] = {s, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t r = 0; r < k; ++r) ++votes[static_cast<std::size_t>(train.label(dist[r].second))];
    }
    std::size_t best = 0;
    for (std::size_t y = 1; y < votes.size(); ++y)
        if (votes[y] > votes[best]) best = y;
    return static_cast<int>(best);
}

namespace detail {

inline std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n)
{
    const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
    for (;;) {
        std::uint64_t r = rng();
        if (r < limit) return r % n;
    }
}

inline void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng)
{
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

} // namespace detail

/// Fold index per sample. Each class is shuffled and dealt round-robin so
/// per-class fold counts differ by at most one; if some class has fewer
/// members than folds, all samples are shuffled and dealt together.
inline std::vector<std::size_t> assign_folds(const std::vector<int>& labels, std::size_t class_count,
                                             std::size_t folds, std::uint64_t seed)
{
    require(folds >= 2, "assign_folds: need at least 2 folds");
    require(folds <= labels.size(), "assign_folds: more folds than samples");
    std::vector<std::vector<std::size_t>> by_class(class_count);
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    bool stratify = std::all_of(by_class.begin(), by_class.end(),
                                [&](const auto& c) { return c.empty() || c.size() >= folds; });
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> fold(labels.size());
    std::size_t deal = 0;
    if (stratify) {
        for (auto& c : by_class) {
            detail::shuffle(c, rng);
            for (std::size_t i : c) fold[i] = deal++ % folds;
        }
    } else {
        std::vector<std::size_t> all(labels.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        detail::shuffle(all, rng);
        for (std::size_t i : all) fold[i] = deal++ % folds;
    }
    return fold;
}

/// What a fold's training data produces: the attributes used and a predictor
/// for normalized query rows.
struct FoldModel {
    AttributeSubset selected;
    std::function<int(std::span<const double>)> predict;
};
using ModelFactory = std::function<FoldModel(const DecisionSystem& train)>;

namespace detail {

inline void summarize(EvaluationReport& r)
{
    double s = 0.0;
    for (double a : r.fold_accuracies) s += a;
    r.mean = s / static_cast<double>(r.fold_accuracies.size());
    double v = 0.0;
    for (double a : r.fold_accuracies) v += (a - r.mean) * (a - r.mean);
    r.std = std::sqrt(v / static_cast<double>(r.fold_accuracies.size()));
}

inline FoldModel knn_model(const DecisionSystem& train, AttributeSubset B, std::size_t knn_k)
{
    FoldModel m;
    m.selected = B;
    auto shared = std::make_shared<DecisionSystem>(train);
    std::size_t k = std::min(knn_k, train.size());
    m.predict = [shared, B, k](std::span<const double> q) { return knn_classify(*shared, B, q, k); };
    return m;
}

} // namespace detail

/// k-fold CV: per fold, min-max scale with training-fold ranges, fit the
/// model on the training fold and score the held-out rows.
inline EvaluationReport cross_validate_model(const DecisionSystem& ds, std::size_t folds, std::uint64_t seed,
                                             const ModelFactory& factory, std::size_t jobs = 1)
{
    require(folds >= 2, "cross_validate: need at least 2 folds");
    require(folds <= ds.size(), "cross_validate: more folds than samples");
    auto start = std::chrono::steady_clock::now();
    auto fold_of = assign_folds(ds.labels(), ds.class_count(), folds, seed);
    EvaluationReport rep;
    rep.dataset = ds.name();
    rep.fold_accuracies.assign(folds, 0.0);
    rep.fold_selected.assign(folds, {});
    parallel_for(folds, jobs, [&](std::size_t f) {
        std::vector<std::size_t> tr, te;
        for (std::size_t i = 0; i < ds.size(); ++i) (fold_of[i] == f ? te : tr).push_back(i);
        DecisionSystem train_raw = select_rows(ds, tr);
        auto ranges = column_ranges(train_raw);
        DecisionSystem train = normalize(train_raw, ranges);
        DecisionSystem test = normalize(select_rows(ds, te), ranges);
        FoldModel model = factory(train);
        std::size_t hit = 0;
        for (std::size_t i = 0; i < test.size(); ++i)
            if (model.predict(test.row(i)) == test.label(i)) ++hit;
        rep.fold_accuracies[f] = static_cast<double>(hit) / static_cast<double>(test.size());
        rep.fold_selected[f] = model.selected.indexes();
    });
    detail::summarize(rep);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

/// kNN cross-validation on a fixed attribute subset.
inline EvaluationReport cross_validate(const DecisionSystem& ds, const AttributeSubset& B, std::size_t folds,
                                       std::size_t knn_k, std::uint64_t seed)
{
    auto rep = cross_validate_model(ds, folds, seed, [&](const DecisionSystem& train) {
        return detail::knn_model(train, B, knn_k);
    });
    rep.method = "kNN";
    rep.parameters = {{"folds", folds}, {"knn_k", knn_k}, {"seed", seed}, {"subset", B.indexes()}};
    if (B.empty()) rep.flags.push_back("empty reduct");
    return rep;
}

inline Oracle oracle_for(Method m, const EvalConfig& cfg, std::size_t lbs, double delta)
{
    switch (m) {
    case Method::prs: return Oracle::prs();
    case Method::nrs: return Oracle::nrs(delta);
    case Method::gbprs: return Oracle::gbprs();
    case Method::gbnrs:
    case Method::gbrct: return Oracle::gbnrs(lbs, cfg.radius);
    case Method::original: break;
    }
    return Oracle::prs();
}

/// One method at one parameter point (lbs for GB methods, delta for NRS).
inline EvaluationReport evaluate_method(const DecisionSystem& ds, Method m, const EvalConfig& cfg,
                                        std::size_t lbs = 2, double delta = 0.0)
{
    const Oracle oracle = oracle_for(m, cfg, lbs, delta);
    std::optional<AttributeSubset> fixed;
    if (m == Method::original) {
        fixed = AttributeSubset::all(ds.attribute_count());
    } else if (cfg.whole_dataset_reduction) {
        fixed = forward_reduction(normalize(ds), oracle, cfg.stop_eps).selected;
    }
    ModelFactory factory = [&](const DecisionSystem& train) -> FoldModel {
        AttributeSubset B = fixed ? *fixed : forward_reduction(train, oracle, cfg.stop_eps).selected;
        if (m == Method::gbrct && !B.empty()) {
            Reduct red;
            red.selected = B;
            red.oracle = oracle;
            auto tree = std::make_shared<ConceptTree>(build_tree(train, red, oracle.balls));
            return {B, [tree](std::span<const double> q) { return classify(*tree, q).label; }};
        }
        return detail::knn_model(train, B, cfg.knn_k);
    };
    // Folds run in parallel only when the caller is not already fanning out.
    EvaluationReport rep = cross_validate_model(ds, cfg.folds, cfg.seed, factory, cfg.jobs);
    rep.method = method_name(m);
    rep.parameters = {{"folds", cfg.folds},
                      {"knn_k", cfg.knn_k},
                      {"seed", cfg.seed},
                      {"stop_eps", cfg.stop_eps},
                      {"reduction", m == Method::original ? "none"
                                    : cfg.whole_dataset_reduction ? "whole-dataset"
                                                                  : "per-fold"}};
    if (m == Method::nrs) rep.parameters["delta"] = delta;
    if (m == Method::gbnrs || m == Method::gbrct) {
        rep.parameters["lbs"] = lbs;
        rep.parameters["radius"] = to_string(cfg.radius);
    }
    if (m == Method::gbrct) rep.parameters["classifier"] = "gbrct";
    if (std::any_of(rep.fold_selected.begin(), rep.fold_selected.end(), [](const auto& s) { return s.empty(); }))
        rep.flags.push_back("empty reduct");
    if (m == Method::prs && !ds.is_discrete()) rep.flags.push_back("prs on continuous data");
    return rep;
}

struct SweepRow {
    double value = 0.0;
    double mean = 0.0;
    double std = 0.0;
};

struct SweepResult {
    std::string parameter; // "lbs" or "delta"
    std::vector<SweepRow> rows;
    double best_value = 0.0;
    EvaluationReport best_report;
    Reduct best_reduct; // on the whole (normalized) dataset at the best value
};

namespace detail {

inline SweepResult run_sweep(const DecisionSystem& ds, Method m, const EvalConfig& cfg, std::string parameter,
                             const std::vector<double>& values)
{
    SweepResult out;
    out.parameter = std::move(parameter);
    std::vector<EvaluationReport> reports(values.size());
    EvalConfig inner = cfg;
    inner.jobs = 1;
    const bool by_lbs = out.parameter == "lbs";
    parallel_for(values.size(), cfg.jobs, [&](std::size_t i) {
        reports[i] = by_lbs ? evaluate_method(ds, m, inner, static_cast<std::size_t>(values[i]))
                            : evaluate_method(ds, m, inner, 2, values[i]);
    });
    std::size_t best = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        out.rows.push_back({values[i], reports[i].mean, reports[i].std});
        if (reports[i].mean > reports[best].mean) best = i;
    }
    out.best_value = values[best];
    out.best_report = reports[best];
    const Oracle oracle = by_lbs ? oracle_for(m, cfg, static_cast<std::size_t>(values[best]), 0.0)
                                 : oracle_for(m, cfg, 2, values[best]);
    out.best_reduct = forward_reduction(normalize(ds), oracle, cfg.stop_eps);
    double secs = 0.0;
    for (const auto& r : reports) secs += r.seconds;
    out.best_report.seconds = secs;
    return out;
}

} // namespace detail

/// LBS from 2d down to 2; best mean accuracy wins, ties to the larger LBS.
inline SweepResult lbs_sweep(const DecisionSystem& ds, const EvalConfig& cfg, Method m = Method::gbnrs)
{
    require(ds.attribute_count() >= 1, "lbs_sweep: no condition attributes");
    std::vector<double> values;
    for (std::size_t l = 2 * ds.attribute_count(); l >= 2; --l) values.push_back(static_cast<double>(l));
    return detail::run_sweep(ds, m, cfg, "lbs", values);
}

/// delta from 0.01 to 0.50 in steps of 0.01; ties to the smaller delta.
inline SweepResult delta_sweep(const DecisionSystem& ds, const EvalConfig& cfg)
{
    std::vector<double> values;
    for (int k = 1; k <= 50; ++k) values.push_back(k / 100.0);
    return detail::run_sweep(ds, Method::nrs, cfg, "delta", values);
}

struct Comparison {
    std::string dataset;
    std::vector<EvaluationReport> reports;
};

/// One report per method on shared folds. GBNRS/GBRCT sweep LBS and NRS
/// sweeps delta unless the config pins them.
inline Comparison compare(const DecisionSystem& ds, const std::vector<Method>& methods, const EvalConfig& cfg)
{
    Comparison c;
    c.dataset = ds.name();
    for (Method m : methods) {
        if ((m == Method::gbnrs || m == Method::gbrct) && !cfg.lbs) {
            c.reports.push_back(lbs_sweep(ds, cfg, m).best_report);
            c.reports.back().parameters["lbs_selection"] = "sweep";
        } else if (m == Method::nrs && !cfg.delta) {
            c.reports.push_back(delta_sweep(ds, cfg).best_report);
            c.reports.back().parameters["delta_selection"] = "sweep";
        } else {
            c.reports.push_back(evaluate_method(ds, m, cfg, cfg.lbs.value_or(2), cfg.delta.value_or(0.0)));
        }
    }
    return c;
}

inline nlohmann::json to_json(const EvaluationReport& r)
{
    return {{"dataset", r.dataset},
            {"method", r.method},
            {"parameters", r.parameters},
            {"fold_accuracies", r.fold_accuracies},
            {"mean", r.mean},
            {"std", r.std},
            {"fold_selected", r.fold_selected},
            {"flags", r.flags}};
}

inline nlohmann::json to_json(const Comparison& c)
{
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : c.reports) reports.push_back(to_json(r));
    return {{"dataset", c.dataset}, {"reports", std::move(reports)}};
}

inline nlohmann::json to_json(const SweepResult& s, const DecisionSystem& ds)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : s.rows) rows.push_back({{s.parameter, r.value}, {"mean", r.mean}, {"std", r.std}});
    return {{"parameter", s.parameter},
            {"best_value", s.best_value},
            {"best_report", to_json(s.best_report)},
            {"best_reduct", to_json(s.best_reduct, ds)},
            {"rows", std::move(rows)}};
}

/// "0.9500±0.0353"
inline std::string mean_pm_std(double mean, double std)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f±%.4f", mean, std);
    return buf;
}

/// Aligned plain-text table; the best mean is marked with '*'.
inline std::string render_text(const Comparison& c)
{
    double best = -1.0;
    for (const auto& r : c.reports) best = std::max(best, r.mean);
    std::ostringstream os;
    char line[256];
    os << "dataset: " << c.dataset << "\n";
    std::snprintf(line, sizeof line, "%-10s %-16s %-12s %s\n", "method", "accuracy", "param", "flags");
    os << line;
    for (const auto& r : c.reports) {
        std::string param = "-";
        if (r.parameters.contains("lbs")) param = "lbs=" + std::to_string(r.parameters["lbs"].get<std::size_t>());
        if (r.parameters.contains("delta")) {
            char b[32];
            std::snprintf(b, sizeof b, "delta=%.2f", r.parameters["delta"].get<double>());
            param = b;
        }
        std::string flags;
        for (const auto& f : r.flags) flags += (flags.empty() ? "" : "; ") + f;
        std::string acc = mean_pm_std(r.mean, r.std) + (r.mean == best ? " *" : "");
        // the ± sign is two bytes in UTF-8; widen the field to keep columns aligned
        std::snprintf(line, sizeof line, "%-10s %-17s %-12s %s\n", r.method.c_str(), acc.c_str(), param.c_str(),
                      flags.c_str());
        os << line;
    }
    return os.str();
}

inline std::string render_csv(const SweepResult& s)
{
    std::ostringstream os;
    os << s.parameter << ",mean,std\n";
    char line[128];
    for (const auto& r : s.rows) {
        if (s.parameter == "lbs")
            std::snprintf(line, sizeof line, "%zu,%.6f,%.6f\n", static_cast<std::size_t>(r.value), r.mean, r.std);
        else
            std::snprintf(line, sizeof line, "%.2f,%.6f,%.6f\n", r.value, r.mean, r.std);
        os << line;
    }
    return os.str();
}

} // namespace gbrs

#endif // GBRS_EVAL_HPP
