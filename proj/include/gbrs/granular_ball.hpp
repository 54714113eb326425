#ifndef GBRS_GRANULAR_BALL_HPP
#define GBRS_GRANULAR_BALL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "gbrs/dataset.hpp"

namespace gbrs {

enum class RadiusMode { average, max };

/// neighborhood: purity/LBS-driven splitting (GBNRS).
/// degenerate: split until every ball is a single exact location, the
/// radius -> 0 limit in which balls are the value-equality classes (GBPRS).
enum class GranulationMode { neighborhood, degenerate };

struct BallOptions {
    std::size_t lbs = 2;
    RadiusMode radius = RadiusMode::average;
    GranulationMode mode = GranulationMode::neighborhood;
};

struct GranularBall {
    std::vector<std::size_t> members; // ascending sample ids
    AttributeSubset subset;
    std::vector<double> center;
    double radius = 0.0;
    double purity = 1.0;
    int label = 0;
    /// Coincides with a differently labelled radius-0 ball; cannot be split
    /// apart, so it never counts toward the positive region.
    bool offender = false;

    std::size_t size() const { return members.size(); }
    bool pure() const { return purity == 1.0; }
};

struct BallSet {
    std::vector<GranularBall> balls;
    AttributeSubset subset;
    std::size_t lbs = 0;
};

namespace detail {

inline double sqdist(const double* x, const double* y, std::size_t dim)
{
    double s = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        double t = x[k] - y[k];
        s += t * t;
    }
    return s;
}

/// Dense projection of a decision system onto one attribute subset plus the
/// exact-location grouping used to keep coincident samples together.
class Granulator {
public:
    Granulator(const DecisionSystem& ds, const AttributeSubset& B, BallOptions opt)
        : ds_(ds), B_(B), opt_(opt), dim_(B.size()), n_(ds.size())
    {
        pts_.resize(n_ * dim_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t k = 0; k < dim_; ++k) pts_[i * dim_ + k] = ds.value(i, B[k]);

        std::vector<std::size_t> order(n_);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double* x = point(a);
            const double* y = point(b);
            for (std::size_t k = 0; k < dim_; ++k)
                if (x[k] != y[k]) return x[k] < y[k];
            return a < b;
        });
        group_.assign(n_, 0);
        std::size_t g = 0;
        for (std::size_t r = 0; r < n_; ++r) {
            if (r > 0 && !same_location(order[r - 1], order[r])) ++g;
            group_[order[r]] = g;
        }
        group_count_ = n_ == 0 ? 0 : g + 1;
        local_.assign(group_count_, npos);
        label_count_.assign(ds.class_count(), 0);
    }

    const double* point(std::size_t i) const { return pts_.data() + i * dim_; }
    std::size_t dim() const { return dim_; }
    const BallOptions& options() const { return opt_; }

    bool same_location(std::size_t a, std::size_t b) const
    {
        const double* x = point(a);
        const double* y = point(b);
        for (std::size_t k = 0; k < dim_; ++k)
            if (x[k] != y[k]) return false;
        return true;
    }

    bool single_location(const std::vector<std::size_t>& members) const
    {
        for (std::size_t i : members)
            if (group_[i] != group_[members.front()]) return false;
        return true;
    }

    GranularBall make(std::vector<std::size_t> members)
    {
        require(!members.empty(), "a granular-ball needs at least one member");
        std::sort(members.begin(), members.end());
        GranularBall b;
        b.subset = B_;
        b.center.assign(dim_, 0.0);
        if (single_location(members)) {
            std::copy(point(members.front()), point(members.front()) + dim_, b.center.begin());
            b.radius = 0.0;
        } else {
            for (std::size_t i : members)
                for (std::size_t k = 0; k < dim_; ++k) b.center[k] += point(i)[k];
            for (double& c : b.center) c /= static_cast<double>(members.size());
            double acc = 0.0;
            for (std::size_t i : members) {
                double dd = std::sqrt(sqdist(point(i), b.center.data(), dim_));
                acc = opt_.radius == RadiusMode::max ? std::max(acc, dd) : acc + dd;
            }
            b.radius = opt_.radius == RadiusMode::max ? acc : acc / static_cast<double>(members.size());
        }
        for (std::size_t i : members) ++label_count_[static_cast<std::size_t>(ds_.label(i))];
        std::size_t best = 0;
        for (std::size_t y = 1; y < label_count_.size(); ++y)
            if (label_count_[y] > label_count_[best]) best = y;
        b.label = static_cast<int>(best);
        b.purity = static_cast<double>(label_count_[best]) / static_cast<double>(members.size());
        for (std::size_t i : members) label_count_[static_cast<std::size_t>(ds_.label(i))] = 0;
        b.members = std::move(members);
        return b;
    }

    /// k-means with k = number of labels present, seeded per label by the
    /// member with the smallest sample id carrying it.
    std::vector<std::vector<std::size_t>> split_by_labels(const GranularBall& ball)
    {
        std::vector<std::size_t> seeds;
        std::vector<bool> seen(ds_.class_count(), false);
        for (std::size_t i : ball.members) {
            auto y = static_cast<std::size_t>(ds_.label(i));
            if (!seen[y]) {
                seen[y] = true;
                seeds.push_back(i);
            }
        }
        std::sort(seeds.begin(), seeds.end());
        if (single_location(ball.members)) {
            // Coincident samples: geometry cannot separate them, labels can.
            std::vector<std::vector<std::size_t>> out;
            for (std::size_t s : seeds) {
                std::vector<std::size_t> part;
                for (std::size_t i : ball.members)
                    if (ds_.label(i) == ds_.label(s)) part.push_back(i);
                out.push_back(std::move(part));
            }
            return out;
        }
        return kmeans(ball.members, seeds);
    }

    /// 2-means seeded with the farthest pair of members (smallest-id pair on ties).
    std::vector<std::vector<std::size_t>> bisect(const GranularBall& ball)
    {
        if (single_location(ball.members)) return {ball.members};
        collect_groups(ball.members);
        std::size_t sa = 0, sb = 1;
        double best = -1.0;
        for (std::size_t a = 0; a < groups_.size(); ++a)
            for (std::size_t b = a + 1; b < groups_.size(); ++b) {
                double dd = sqdist(point(groups_[a].rep), point(groups_[b].rep), dim_);
                if (dd > best) {
                    best = dd;
                    sa = a;
                    sb = b;
                }
            }
        std::vector<std::size_t> seeds{groups_[sa].rep, groups_[sb].rep};
        release_groups();
        std::sort(seeds.begin(), seeds.end());
        return kmeans(ball.members, seeds);
    }

    bool should_split(const GranularBall& ball) const
    {
        if (opt_.mode == GranulationMode::degenerate) return ball.radius > 0.0;
        return !ball.pure() && ball.size() > opt_.lbs;
    }

    std::vector<std::vector<std::size_t>> split(const GranularBall& ball)
    {
        return ball.pure() ? bisect(ball) : split_by_labels(ball);
    }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    struct Group {
        std::size_t rep;   // smallest member id at this location
        std::size_t count; // members at this location
    };

    /// Builds groups_ (ordered by smallest member id) and local_ for `members`.
    void collect_groups(const std::vector<std::size_t>& members)
    {
        groups_.clear();
        for (std::size_t i : members) {
            std::size_t g = group_[i];
            if (local_[g] == npos) {
                local_[g] = groups_.size();
                groups_.push_back({i, 0});
            }
            ++groups_[local_[g]].count;
        }
    }

    void release_groups()
    {
        for (const Group& gr : groups_) local_[group_[gr.rep]] = npos;
    }

    /// Weighted k-means over distinct locations, so coincident samples always
    /// share a cluster. Clusters are ordered by seed sample id; equidistant
    /// locations go to the lower cluster. An empty cluster takes the location
    /// farthest from the centroid of the largest multi-location cluster.
    std::vector<std::vector<std::size_t>> kmeans(const std::vector<std::size_t>& members,
                                                 const std::vector<std::size_t>& seeds)
    {
        collect_groups(members);
        const std::size_t G = groups_.size();
        const std::size_t k = seeds.size();
        std::vector<double> cent(k * dim_);
        for (std::size_t j = 0; j < k; ++j)
            std::copy(point(seeds[j]), point(seeds[j]) + dim_, cent.begin() + static_cast<std::ptrdiff_t>(j * dim_));

        std::vector<std::size_t> assign(G, npos), next(G);
        std::vector<double> weight(k), gcount(k);
        auto recompute = [&](std::size_t j) {
            std::fill(cent.begin() + static_cast<std::ptrdiff_t>(j * dim_),
                      cent.begin() + static_cast<std::ptrdiff_t>((j + 1) * dim_), 0.0);
            double w = 0.0;
            for (std::size_t g = 0; g < G; ++g) {
                if (next[g] != j) continue;
                const double* x = point(groups_[g].rep);
                double c = static_cast<double>(groups_[g].count);
                for (std::size_t t = 0; t < dim_; ++t) cent[j * dim_ + t] += c * x[t];
                w += c;
            }
            if (w > 0.0)
                for (std::size_t t = 0; t < dim_; ++t) cent[j * dim_ + t] /= w;
        };

        constexpr int max_iterations = 100;
        for (int it = 0; it < max_iterations; ++it) {
            std::fill(weight.begin(), weight.end(), 0.0);
            std::fill(gcount.begin(), gcount.end(), 0.0);
            for (std::size_t g = 0; g < G; ++g) {
                const double* x = point(groups_[g].rep);
                std::size_t bj = 0;
                double bd = sqdist(x, cent.data(), dim_);
                for (std::size_t j = 1; j < k; ++j) {
                    double dd = sqdist(x, cent.data() + j * dim_, dim_);
                    if (dd < bd) {
                        bd = dd;
                        bj = j;
                    }
                }
                next[g] = bj;
                weight[bj] += static_cast<double>(groups_[g].count);
                gcount[bj] += 1.0;
            }
            for (std::size_t e = 0; e < k; ++e) {
                if (gcount[e] > 0.0) continue;
                std::size_t donor = npos;
                for (std::size_t j = 0; j < k; ++j)
                    if (gcount[j] >= 2.0 && (donor == npos || weight[j] > weight[donor])) donor = j;
                if (donor == npos) break;
                recompute(donor);
                std::size_t far = npos;
                double fd = -1.0;
                for (std::size_t g = 0; g < G; ++g) {
                    if (next[g] != donor) continue;
                    double dd = sqdist(point(groups_[g].rep), cent.data() + donor * dim_, dim_);
                    if (dd > fd || (dd == fd && groups_[g].rep < groups_[far].rep)) {
                        fd = dd;
                        far = g;
                    }
                }
                next[far] = e;
                double c = static_cast<double>(groups_[far].count);
                weight[donor] -= c;
                gcount[donor] -= 1.0;
                weight[e] += c;
                gcount[e] += 1.0;
            }
            if (next == assign) break;
            assign = next;
            for (std::size_t j = 0; j < k; ++j)
                if (gcount[j] > 0.0) recompute(j);
        }

        std::vector<std::vector<std::size_t>> clusters(k);
        for (std::size_t i : members) clusters[assign[local_[group_[i]]]].push_back(i);
        release_groups();
        std::erase_if(clusters, [](const auto& c) { return c.empty(); });
        return clusters;
    }

    const DecisionSystem& ds_;
    AttributeSubset B_;
    BallOptions opt_;
    std::size_t dim_;
    std::size_t n_;
    std::vector<double> pts_;
    std::vector<std::size_t> group_;
    std::size_t group_count_ = 0;
    std::vector<std::size_t> local_;
    std::vector<Group> groups_;
    std::vector<std::size_t> label_count_;
};

inline std::vector<std::size_t> universe_or_all(const DecisionSystem& ds,
                                                std::span<const std::size_t> universe)
{
    if (!universe.empty()) return {universe.begin(), universe.end()};
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
}

/// Index of the "larger" ball: larger radius, then larger size, then the
/// smaller smallest member id.
inline std::size_t larger_of(const std::vector<GranularBall>& balls, std::size_t i, std::size_t j)
{
    const GranularBall& a = balls[i];
    const GranularBall& b = balls[j];
    if (a.radius != b.radius) return a.radius > b.radius ? i : j;
    if (a.size() != b.size()) return a.size() > b.size() ? i : j;
    return a.members.front() < b.members.front() ? i : j;
}

inline double center_gap(const GranularBall& b1, const GranularBall& b2)
{
    return std::sqrt(sqdist(b1.center.data(), b2.center.data(), b1.center.size())) -
           (b1.radius + b2.radius);
}

inline void generate_in_place(Granulator& gr, std::vector<GranularBall>& balls)
{
    for (;;) {
        std::vector<GranularBall> next;
        next.reserve(balls.size() * 2);
        for (GranularBall& b : balls) {
            if (gr.should_split(b)) {
                auto parts = gr.split(b);
                if (parts.size() >= 2) {
                    for (auto& p : parts) next.push_back(gr.make(std::move(p)));
                    continue;
                }
            }
            next.push_back(std::move(b));
        }
        bool changed = next.size() != balls.size();
        balls = std::move(next);
        if (!changed) break;
    }
}

inline void remove_overlap_in_place(Granulator& gr, std::vector<GranularBall>& balls)
{
    for (;;) {
        const std::size_t m = balls.size();
        std::vector<char> split_me(m, 0);
        bool any = false;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                if (balls[i].label == balls[j].label) continue;
                if (balls[i].radius + balls[j].radius == 0.0) continue;
                if (center_gap(balls[i], balls[j]) < 0.0) {
                    std::size_t l = larger_of(balls, i, j);
                    if (balls[l].radius > 0.0) {
                        split_me[l] = 1;
                        any = true;
                    }
                }
            }
        if (!any) break;
        std::vector<GranularBall> next;
        next.reserve(m * 2);
        bool progressed = false;
        for (std::size_t i = 0; i < m; ++i) {
            if (split_me[i]) {
                auto parts = gr.split(balls[i]);
                if (parts.size() >= 2) {
                    progressed = true;
                    for (auto& p : parts) next.push_back(gr.make(std::move(p)));
                    continue;
                }
            }
            next.push_back(std::move(balls[i]));
        }
        balls = std::move(next);
        if (!progressed) break;
    }

    // Radius-0 balls sharing one location but carrying different labels are
    // contradictory duplicates: flag them so they stay out of the positive region.
    std::vector<std::size_t> point_balls;
    for (std::size_t i = 0; i < balls.size(); ++i)
        if (balls[i].radius == 0.0) point_balls.push_back(i);
    std::sort(point_balls.begin(), point_balls.end(), [&](std::size_t a, std::size_t b) {
        if (balls[a].center != balls[b].center) return balls[a].center < balls[b].center;
        return a < b;
    });
    for (std::size_t r = 0; r < point_balls.size();) {
        std::size_t e = r + 1;
        while (e < point_balls.size() && balls[point_balls[e]].center == balls[point_balls[r]].center) ++e;
        bool mixed = false;
        for (std::size_t t = r + 1; t < e; ++t)
            mixed = mixed || balls[point_balls[t]].label != balls[point_balls[r]].label;
        if (mixed)
            for (std::size_t t = r; t < e; ++t) balls[point_balls[t]].offender = true;
        r = e;
    }
}

} // namespace detail

/// Center (member mean), radius (mean member-to-center distance, or max in
/// RadiusMode::max), purity and majority label (ties -> smallest class id).
inline GranularBall make_ball(const DecisionSystem& ds, const AttributeSubset& B,
                              std::vector<std::size_t> members, BallOptions opt = {})
{
    require(!members.empty(), "make_ball: empty member set");
    for (std::size_t i : members) require(i < ds.size(), "make_ball: sample id out of range");
    detail::Granulator gr(ds, B, opt);
    return gr.make(std::move(members));
}

/// Splits an impure ball into one child per label present (k-means).
inline std::vector<GranularBall> split_ball(const DecisionSystem& ds, const AttributeSubset& B,
                                            const GranularBall& ball, BallOptions opt = {})
{
    require(!ball.pure(), "split_ball: ball is pure");
    detail::Granulator gr(ds, B, opt);
    std::vector<GranularBall> out;
    for (auto& part : gr.split_by_labels(ball)) out.push_back(gr.make(std::move(part)));
    return out;
}

/// The splitting phase: repeatedly split every ball with purity < 1 and
/// size > lbs until the ball count stops changing.
inline BallSet generate_balls(const DecisionSystem& ds, const AttributeSubset& B, BallOptions opt,
                              std::span<const std::size_t> universe = {})
{
    require(opt.lbs >= 2 || opt.mode == GranulationMode::degenerate, "generate_balls: lbs must be >= 2");
    auto ids = detail::universe_or_all(ds, universe);
    require(!ids.empty(), "generate_balls: empty universe");
    detail::Granulator gr(ds, B, opt);
    std::vector<GranularBall> balls;
    balls.push_back(gr.make(std::move(ids)));
    detail::generate_in_place(gr, balls);
    return {std::move(balls), B, opt.lbs};
}

inline BallSet generate_balls(const DecisionSystem& ds, const AttributeSubset& B, std::size_t lbs)
{
    return generate_balls(ds, B, BallOptions{lbs});
}

/// distance(center1, center2) - (radius1 + radius2); negative means overlap.
inline double boundary_distance(const GranularBall& b1, const GranularBall& b2)
{
    require(b1.subset == b2.subset, "boundary_distance: balls built on different subsets");
    return detail::center_gap(b1, b2);
}

/// Splits the larger ball of every differently-labelled overlapping pair
/// until no such pair remains, then flags contradictory coincident balls.
inline BallSet remove_heterogeneous_overlap(const DecisionSystem& ds, const AttributeSubset& B,
                                            BallSet bs, BallOptions opt = {})
{
    detail::Granulator gr(ds, B, opt);
    detail::remove_overlap_in_place(gr, bs.balls);
    return bs;
}

/// Full ball pipeline: splitting phase followed by overlap removal.
inline BallSet granulate(const DecisionSystem& ds, const AttributeSubset& B, BallOptions opt,
                         std::span<const std::size_t> universe = {})
{
    require(!B.empty(), "granulate: empty attribute subset");
    auto ids = detail::universe_or_all(ds, universe);
    require(!ids.empty(), "granulate: empty universe");
    detail::Granulator gr(ds, B, opt);
    std::vector<GranularBall> balls;
    balls.push_back(gr.make(std::move(ids)));
    detail::generate_in_place(gr, balls);
    detail::remove_overlap_in_place(gr, balls);
    return {std::move(balls), B, opt.lbs};
}

inline nlohmann::json to_json(const BallSet& bs)
{
    nlohmann::json balls = nlohmann::json::array();
    for (const GranularBall& b : bs.balls)
        balls.push_back({{"members", b.members},
                         {"center", b.center},
                         {"radius", b.radius},
                         {"purity", b.purity},
                         {"label", b.label},
                         {"offender", b.offender}});
    return {{"subset", bs.subset.indexes()}, {"lbs", bs.lbs}, {"balls", std::move(balls)}};
}

} // namespace gbrs

#endif // GBRS_GRANULAR_BALL_HPP
