#ifndef GBRS_TESTS_SUPPORT_HPP
#define GBRS_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gbrs/dataset.hpp"

namespace testing_support {

/// Builds a system straight from rows; values are taken as already normalized.
inline gbrs::DecisionSystem make_system(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                                        std::string name = "toy")
{
    const std::size_t d = rows.empty() ? 0 : rows.front().size();
    std::vector<gbrs::AttributeMeta> attrs(d);
    for (std::size_t a = 0; a < d; ++a) attrs[a].name = "a" + std::to_string(a);
    std::vector<double> flat;
    for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
    int top = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
    std::vector<std::string> names;
    for (int y = 0; y <= top; ++y) names.push_back("c" + std::to_string(y));
    for (std::size_t a = 0; a < d && !rows.empty(); ++a) {
        attrs[a].raw_min = attrs[a].raw_max = rows[0][a];
        for (const auto& r : rows) {
            attrs[a].raw_min = std::min(attrs[a].raw_min, r[a]);
            attrs[a].raw_max = std::max(attrs[a].raw_max, r[a]);
        }
    }
    return gbrs::DecisionSystem(std::move(name), attrs, flat, flat, labels, names, true);
}

/// Random table with integer values in [0, levels) and labels in [0, classes).
inline gbrs::DecisionSystem random_discrete(std::mt19937_64& rng, std::size_t n, std::size_t d, int levels,
                                            int classes)
{
    std::uniform_int_distribution<int> v(0, levels - 1), y(0, classes - 1);
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& x : rows[i]) x = v(rng);
        labels[i] = y(rng);
    }
    return make_system(rows, labels, "random");
}

/// Random continuous table in [0,1]^d with labels driven by a noisy linear rule.
inline gbrs::DecisionSystem random_continuous(std::mt19937_64& rng, std::size_t n, std::size_t d, int classes)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (auto& x : rows[i]) {
            x = u(rng);
            s += x;
        }
        s = s / static_cast<double>(d) + 0.2 * (u(rng) - 0.5);
        labels[i] = std::clamp(static_cast<int>(s * classes), 0, classes - 1);
    }
    return make_system(rows, labels, "random");
}

/// Every non-empty subset of {0..d-1}, as ascending index lists.
inline std::vector<std::vector<std::size_t>> all_subsets(std::size_t d)
{
    std::vector<std::vector<std::size_t>> out;
    for (std::uint32_t mask = 1; mask < (1u << d); ++mask) {
        std::vector<std::size_t> s;
        for (std::size_t a = 0; a < d; ++a)
            if (mask & (1u << a)) s.push_back(a);
        out.push_back(s);
    }
    return out;
}

inline std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

} // namespace testing_support

#endif // GBRS_TESTS_SUPPORT_HPP
