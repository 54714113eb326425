#ifndef GBRS_ROUGHSET_HPP
#define GBRS_ROUGHSET_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "gbrs/dataset.hpp"
#include "gbrs/granular_ball.hpp"
#include "gbrs/parallel.hpp"

namespace gbrs {

enum class OracleKind { prs, nrs, gbrs };

/// Positive-region oracle and its parameters.
struct Oracle {
    OracleKind kind = OracleKind::prs;
    double delta = 0.0;   // NRS neighborhood radius
    BallOptions balls{};  // GBRS granulation
    Metric metric{};      // NRS distance

    static Oracle prs() { return {}; }
    static Oracle nrs(double delta) { return {OracleKind::nrs, delta, {}, {}}; }
    static Oracle gbnrs(std::size_t lbs, RadiusMode r = RadiusMode::average)
    {
        return {OracleKind::gbrs, 0.0, {lbs, r, GranulationMode::neighborhood}, {}};
    }
    static Oracle gbprs() { return {OracleKind::gbrs, 0.0, {0, RadiusMode::average, GranulationMode::degenerate}, {}}; }

    std::string name() const
    {
        switch (kind) {
        case OracleKind::prs: return "prs";
        case OracleKind::nrs: return "nrs";
        case OracleKind::gbrs:
            return balls.mode == GranulationMode::degenerate ? "gbprs" : "gbnrs";
        }
        return "?";
    }
};

struct RegionAssignment {
    std::vector<std::size_t> positive; // ascending
    std::vector<std::size_t> boundary; // ascending
    Oracle oracle;
};

/// Equivalence classes of exact raw-value equality on B, ordered by their
/// smallest member.
inline std::vector<std::vector<std::size_t>> prs_partition(const DecisionSystem& ds,
                                                           const AttributeSubset& B)
{
    require(!B.empty(), "prs_partition: empty attribute subset");
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t x, std::size_t y) {
        for (std::size_t a : B)
            if (ds.raw(x, a) != ds.raw(y, a)) return ds.raw(x, a) < ds.raw(y, a);
        return x < y;
    };
    auto equal = [&](std::size_t x, std::size_t y) {
        for (std::size_t a : B)
            if (ds.raw(x, a) != ds.raw(y, a)) return false;
        return true;
    };
    std::sort(order.begin(), order.end(), less);
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (r == 0 || !equal(order[r - 1], order[r])) classes.emplace_back();
        classes.back().push_back(order[r]);
    }
    std::sort(classes.begin(), classes.end(),
              [](const auto& p, const auto& q) { return p.front() < q.front(); });
    return classes;
}

namespace detail {

inline RegionAssignment finish_region(std::vector<char> positive_flag, Oracle oracle)
{
    RegionAssignment r;
    r.oracle = oracle;
    for (std::size_t i = 0; i < positive_flag.size(); ++i)
        (positive_flag[i] ? r.positive : r.boundary).push_back(i);
    return r;
}

} // namespace detail

/// Union of equivalence classes lying wholly inside one decision class.
inline RegionAssignment prs_positive_region(const DecisionSystem& ds, const AttributeSubset& B)
{
    std::vector<char> pos(ds.size(), 0);
    for (const auto& cls : prs_partition(ds, B)) {
        bool pure = std::all_of(cls.begin(), cls.end(),
                                [&](std::size_t i) { return ds.label(i) == ds.label(cls.front()); });
        if (pure)
            for (std::size_t i : cls) pos[i] = 1;
    }
    return detail::finish_region(std::move(pos), Oracle::prs());
}

/// Sample k is positive iff every sample within distance delta of it
/// (inclusive, k itself included) shares its label.
inline RegionAssignment nrs_positive_region(const DecisionSystem& ds, const AttributeSubset& B,
                                            double delta, Metric metric = {})
{
    require(delta >= 0.0, "nrs_positive_region: delta must be non-negative");
    const std::size_t n = ds.size(), dim = B.size();
    std::vector<double> pts(n * dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < dim; ++k) pts[i * dim + k] = ds.value(i, B[k]);

    const bool euclid = metric.p == 2.0;
    const double cut = delta * delta * (1.0 + 1e-9) + 1e-300;
    auto within = [&](std::size_t i, std::size_t j) {
        const double* x = &pts[i * dim];
        const double* y = &pts[j * dim];
        if (euclid) {
            double s = detail::sqdist(x, y, dim);
            return s <= cut && std::sqrt(s) <= delta;
        }
        return metric({x, dim}, {y, dim}) <= delta;
    };

    std::vector<char> pos(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        if (!pos[i]) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (ds.label(j) == ds.label(i)) continue;
            if (within(i, j)) {
                // Within-delta is symmetric, so both ends are demoted.
                pos[i] = 0;
                pos[j] = 0;
                break;
            }
        }
    }
    Oracle o = Oracle::nrs(delta);
    o.metric = metric;
    return detail::finish_region(std::move(pos), o);
}

/// Members of pure balls are positive, except flagged coincident offenders.
inline RegionAssignment gbrs_positive_region(const BallSet& bs, const DecisionSystem& ds,
                                             Oracle oracle = Oracle::gbnrs(2))
{
    std::vector<char> pos(ds.size(), 0);
    std::vector<char> seen(ds.size(), 0);
    for (const GranularBall& b : bs.balls)
        for (std::size_t i : b.members) {
            seen[i] = 1;
            if (b.pure() && !b.offender) pos[i] = 1;
        }
    RegionAssignment r;
    r.oracle = oracle;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (!seen[i]) continue;
        (pos[i] ? r.positive : r.boundary).push_back(i);
    }
    return r;
}

inline RegionAssignment positive_region(const DecisionSystem& ds, const AttributeSubset& B,
                                        const Oracle& oracle)
{
    switch (oracle.kind) {
    case OracleKind::prs: return prs_positive_region(ds, B);
    case OracleKind::nrs: return nrs_positive_region(ds, B, oracle.delta, oracle.metric);
    case OracleKind::gbrs: return gbrs_positive_region(granulate(ds, B, oracle.balls), ds, oracle);
    }
    return {};
}

/// |POS| / n.
inline double dependence(const RegionAssignment& region, std::size_t n)
{
    require(n > 0, "dependence: empty universe");
    return static_cast<double>(region.positive.size()) / static_cast<double>(n);
}

/// Dependence of the decision on B under `oracle`; the empty set scores 0.
inline double gamma(const DecisionSystem& ds, const AttributeSubset& B, const Oracle& oracle)
{
    if (B.empty()) return 0.0;
    return dependence(positive_region(ds, B, oracle), ds.size());
}

/// gamma(B + a) - gamma(B).
inline double significance(const DecisionSystem& ds, std::size_t a, const AttributeSubset& B,
                           const Oracle& oracle)
{
    require(a < ds.attribute_count(), "significance: attribute out of range");
    require(!B.contains(a), "significance: attribute already in B");
    return gamma(ds, B.with(a), oracle) - gamma(ds, B, oracle);
}

struct Reduct {
    AttributeSubset selected;
    std::vector<double> gamma_trace;
    Oracle oracle;
};

/// Greedy forward selection: each round adds the attribute with the largest
/// significance (smallest index on ties) while that significance exceeds
/// stop_eps.
inline Reduct forward_reduction(const DecisionSystem& ds, const Oracle& oracle, double stop_eps = 0.0,
                                std::size_t jobs = 1)
{
    require(ds.attribute_count() >= 1, "forward_reduction: no condition attributes");
    Reduct red;
    red.oracle = oracle;
    double current = 0.0;
    const std::size_t d = ds.attribute_count();
    while (red.selected.size() < d) {
        std::vector<std::size_t> cand;
        for (std::size_t a = 0; a < d; ++a)
            if (!red.selected.contains(a)) cand.push_back(a);
        std::vector<double> g(cand.size());
        parallel_for(cand.size(), jobs,
                     [&](std::size_t k) { g[k] = gamma(ds, red.selected.with(cand[k]), oracle); });
        std::size_t best = 0;
        for (std::size_t k = 1; k < cand.size(); ++k)
            if (g[k] - current > g[best] - current) best = k;
        if (g[best] - current <= stop_eps) break;
        red.selected = red.selected.with(cand[best]);
        current = g[best];
        red.gamma_trace.push_back(current);
    }
    return red;
}

inline const char* to_string(RadiusMode r) { return r == RadiusMode::max ? "max" : "avg"; }

inline nlohmann::json oracle_parameters(const Oracle& o)
{
    switch (o.kind) {
    case OracleKind::prs: return nlohmann::json::object();
    case OracleKind::nrs: return {{"delta", o.delta}};
    case OracleKind::gbrs:
        if (o.balls.mode == GranulationMode::degenerate) return {{"radius", to_string(o.balls.radius)}};
        return {{"lbs", o.balls.lbs}, {"radius", to_string(o.balls.radius)}};
    }
    return {};
}

inline nlohmann::json to_json(const Reduct& r, const DecisionSystem& ds)
{
    std::vector<std::string> names;
    for (std::size_t a : r.selected) names.push_back(ds.attribute(a).name);
    return {{"oracle", r.oracle.name()},
            {"parameters", oracle_parameters(r.oracle)},
            {"selected", r.selected.indexes()},
            {"selected_names", names},
            {"gamma_trace", r.gamma_trace}};
}

inline Oracle oracle_from_name(const std::string& name, const nlohmann::json& params = {})
{
    Oracle o;
    if (name == "prs") {
        o = Oracle::prs();
    } else if (name == "nrs") {
        o = Oracle::nrs(params.value("delta", 0.0));
    } else if (name == "gbnrs") {
        o = Oracle::gbnrs(params.value("lbs", std::size_t{2}));
    } else if (name == "gbprs") {
        o = Oracle::gbprs();
    } else {
        throw ParseError("unknown oracle '" + name + "'");
    }
    if (o.kind == OracleKind::gbrs && params.value("radius", std::string("avg")) == "max")
        o.balls.radius = RadiusMode::max;
    return o;
}

inline Reduct reduct_from_json(const nlohmann::json& j, std::size_t attribute_count)
{
    try {
        Reduct r;
        r.oracle = oracle_from_name(j.at("oracle").get<std::string>(),
                                    j.value("parameters", nlohmann::json::object()));
        r.selected = AttributeSubset(j.at("selected").get<std::vector<std::size_t>>(), attribute_count);
        r.gamma_trace = j.at("gamma_trace").get<std::vector<double>>();
        if (r.gamma_trace.size() != r.selected.size())
            throw ParseError("reduct: gamma_trace length differs from selected length");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("reduct: ") + e.what());
    } catch (const ContractViolation& e) {
        throw ParseError(std::string("reduct: ") + e.what());
    }
}

} // namespace gbrs

#endif // GBRS_ROUGHSET_HPP
