#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "gbrs/eval.hpp"
#include "support.hpp"

using namespace gbrs;
using testing_support::make_system;

namespace {

int brute_knn(const DecisionSystem& train, const AttributeSubset& B, const std::vector<double>& q, std::size_t k)
{
    std::vector<std::tuple<double, std::size_t, int>> all;
    for (std::size_t i = 0; i < train.size(); ++i) {
        double s = 0;
        for (std::size_t a : B) s += std::pow(train.value(i, a) - q[a], 2);
        all.emplace_back(std::sqrt(s), i, train.label(i));
    }
    std::sort(all.begin(), all.end());
    std::vector<int> votes(train.class_count(), 0);
    for (std::size_t r = 0; r < k; ++r) ++votes[static_cast<std::size_t>(std::get<2>(all[r]))];
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

DecisionSystem two_blobs(std::size_t per_class, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.03);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < per_class; ++i) {
        rows.push_back({0.2 + g(rng), 0.2 + g(rng), 0.5 + g(rng)});
        labels.push_back(0);
        rows.push_back({0.8 + g(rng), 0.8 + g(rng), 0.5 + g(rng)});
        labels.push_back(1);
    }
    return make_system(rows, labels, "blobs");
}

DecisionSystem single_class(std::size_t d)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u;
    std::vector<std::vector<double>> rows(30, std::vector<double>(d));
    for (auto& r : rows)
        for (auto& x : r) x = u(rng);
    return make_system(rows, std::vector<int>(30, 0), "single");
}

EvalConfig quick()
{
    EvalConfig c;
    c.folds = 5;
    c.seed = 0;
    return c;
}

} // namespace

TEST(Knn, Examples)
{
    auto ds = make_system({{0.0}, {0.1}, {0.2}, {0.9}}, {0, 0, 1, 1});
    auto B = AttributeSubset::all(1);
    std::vector<double> exact{0.9};
    EXPECT_EQ(knn_classify(ds, B, exact, 1), 1);
    std::vector<double> q{0.05};
    EXPECT_EQ(knn_classify(ds, B, q, 3), 0); // neighbors 0,1,2 -> A,A,B

    auto tie = make_system({{0.0}, {1.0}}, {1, 0});
    std::vector<double> mid{0.4};
    EXPECT_EQ(knn_classify(tie, B, mid, 2), 0);
    EXPECT_THROW(knn_classify(tie, B, mid, 3), ContractViolation);
    EXPECT_THROW(knn_classify(tie, B, mid, 0), ContractViolation);
}

TEST(Knn, DistanceTieGoesToSmallerSampleId)
{
    auto ds = make_system({{0.0}, {1.0}}, {1, 0});
    std::vector<double> mid{0.5};
    EXPECT_EQ(knn_classify(ds, AttributeSubset::all(1), mid, 1), 1);
}

TEST(Knn, EmptySubsetIsMajorityClass)
{
    auto ds = make_system({{0.0}, {1.0}, {2.0}}, {1, 1, 0});
    std::vector<double> q{0.0};
    EXPECT_EQ(knn_classify(ds, AttributeSubset{}, q, 1), 1);
}

TEST(Knn, MatchesBruteForce)
{
    std::mt19937_64 rng(41);
    auto ds = testing_support::random_continuous(rng, 120, 4, 3);
    std::uniform_real_distribution<double> u;
    AttributeSubset B({3, 1}, 4);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> q{u(rng), u(rng), u(rng), u(rng)};
        std::size_t k = 1 + rng() % 7;
        EXPECT_EQ(knn_classify(ds, B, q, k), brute_knn(ds, B, q, k));
    }
}

TEST(Knn, SelfClassificationIsPerfect)
{
    std::mt19937_64 rng(43);
    auto ds = testing_support::random_continuous(rng, 80, 3, 2);
    auto B = AttributeSubset::all(3);
    for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(knn_classify(ds, B, ds.row(i), 1), ds.label(i));
}

TEST(Folds, PartitionAndStratification)
{
    std::mt19937_64 rng(47);
    std::vector<int> labels(103);
    for (auto& y : labels) y = static_cast<int>(rng() % 3);
    auto fold = assign_folds(labels, 3, 5, 9);
    ASSERT_EQ(fold.size(), labels.size());
    for (int y = 0; y < 3; ++y) {
        std::vector<int> per(5, 0);
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == y) ++per[fold[i]];
        EXPECT_LE(*std::max_element(per.begin(), per.end()) - *std::min_element(per.begin(), per.end()), 1);
    }
    EXPECT_EQ(fold, assign_folds(labels, 3, 5, 9));
    EXPECT_NE(fold, assign_folds(labels, 3, 5, 10));
}

TEST(Folds, SmallClassFallsBackToPlainSplit)
{
    std::vector<int> labels{0, 0, 0, 0, 0, 0, 0, 0, 1, 1};
    auto fold = assign_folds(labels, 2, 5, 0);
    std::vector<int> size(5, 0);
    for (auto f : fold) ++size[f];
    for (int s : size) EXPECT_EQ(s, 2);
}

TEST(Folds, BadCountsRejected)
{
    std::vector<int> labels{0, 1, 0};
    EXPECT_THROW(assign_folds(labels, 2, 1, 0), ContractViolation);
    EXPECT_THROW(assign_folds(labels, 2, 4, 0), ContractViolation);
}

TEST(CrossValidate, PerfectSeparation)
{
    auto ds = two_blobs(20, 1);
    auto r = cross_validate(ds, AttributeSubset::all(3), 5, 1, 0);
    EXPECT_EQ(r.mean, 1.0);
    EXPECT_EQ(r.std, 0.0);
    EXPECT_EQ(r.fold_accuracies.size(), 5u);
}

TEST(CrossValidate, DeterministicAndSelfConsistent)
{
    std::mt19937_64 rng(53);
    auto ds = testing_support::random_continuous(rng, 90, 3, 2);
    auto a = cross_validate(ds, AttributeSubset({0, 2}, 3), 5, 3, 7);
    auto b = cross_validate(ds, AttributeSubset({0, 2}, 3), 5, 3, 7);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
    double s = 0;
    for (double x : a.fold_accuracies) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
        s += x;
    }
    double mean = s / 5.0, v = 0;
    for (double x : a.fold_accuracies) v += (x - mean) * (x - mean);
    EXPECT_NEAR(a.mean, mean, 1e-12);
    EXPECT_NEAR(a.std, std::sqrt(v / 5.0), 1e-12);
    EXPECT_THROW(cross_validate(ds, AttributeSubset::all(3), 91, 1, 0), ContractViolation);
    EXPECT_THROW(cross_validate(ds, AttributeSubset::all(3), 1, 1, 0), ContractViolation);
}

TEST(CrossValidate, FoldsRunInParallelIdentically)
{
    auto ds = normalize(load_csv(std::string(GBRS_DATA_DIR) + "/wine.csv"));
    auto cfg = quick();
    auto a = evaluate_method(ds, Method::gbnrs, cfg, 6);
    cfg.jobs = 4;
    auto b = evaluate_method(ds, Method::gbnrs, cfg, 6);
    EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(EvaluateMethod, EmptyReductFallsBackToMajority)
{
    // a constant attribute never separates the labels, in any training fold
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int k = 0; k < 10; ++k) {
        for (int label : {0, 1, 1}) {
            rows.push_back({0.5});
            labels.push_back(label);
        }
    }
    auto ds = make_system(rows, labels, "noise");
    auto r = evaluate_method(ds, Method::prs, quick());
    EXPECT_NE(std::find(r.flags.begin(), r.flags.end(), "empty reduct"), r.flags.end());
    auto fold = assign_folds(ds.labels(), ds.class_count(), 5, 0);
    for (std::size_t f = 0; f < 5; ++f) {
        std::vector<int> votes(2, 0);
        std::size_t hit = 0, total = 0;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (fold[i] != f) ++votes[ds.label(i)];
        int majority = votes[1] > votes[0] ? 1 : 0;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (fold[i] == f) {
                ++total;
                hit += ds.label(i) == majority;
            }
        EXPECT_DOUBLE_EQ(r.fold_accuracies[f], static_cast<double>(hit) / static_cast<double>(total));
        EXPECT_TRUE(r.fold_selected[f].empty());
    }
}

TEST(EvaluateMethod, PrsOnContinuousDataIsFlagged)
{
    auto ds = load_csv(std::string(GBRS_DATA_DIR) + "/wine.csv");
    auto r = evaluate_method(ds, Method::prs, quick());
    EXPECT_NE(std::find(r.flags.begin(), r.flags.end(), "prs on continuous data"), r.flags.end());
    EXPECT_EQ(r.parameters.at("reduction"), "per-fold");
}

TEST(EvaluateMethod, WholeDatasetReductionUsesOneReduct)
{
    auto ds = load_csv(std::string(GBRS_DATA_DIR) + "/wine.csv");
    auto cfg = quick();
    cfg.whole_dataset_reduction = true;
    auto r = evaluate_method(ds, Method::gbnrs, cfg, 5);
    EXPECT_EQ(r.parameters.at("reduction"), "whole-dataset");
    for (const auto& s : r.fold_selected) EXPECT_EQ(s, r.fold_selected.front());
}

TEST(LbsSweep, CountsFromTwiceDDownToTwo)
{
    std::mt19937_64 rng(59);
    auto ds = testing_support::random_continuous(rng, 60, 8, 2);
    auto sw = lbs_sweep(ds, quick());
    ASSERT_EQ(sw.rows.size(), 15u);
    EXPECT_EQ(sw.rows.front().value, 16.0);
    EXPECT_EQ(sw.rows.back().value, 2.0);

    auto one = lbs_sweep(testing_support::random_continuous(rng, 30, 1, 2), quick());
    ASSERT_EQ(one.rows.size(), 1u);
    EXPECT_EQ(one.best_value, 2.0);
}

TEST(LbsSweep, TiesGoToLargerLbs)
{
    auto sw = lbs_sweep(single_class(3), quick());
    for (const auto& r : sw.rows) EXPECT_EQ(r.mean, 1.0);
    EXPECT_EQ(sw.best_value, 6.0);
    EXPECT_EQ(sw.best_reduct.selected.size(), 1u);
}

TEST(DeltaSweep, FiftyRowsAndTiesToSmallerDelta)
{
    auto sw = delta_sweep(single_class(2), quick());
    ASSERT_EQ(sw.rows.size(), 50u);
    EXPECT_DOUBLE_EQ(sw.rows.front().value, 0.01);
    EXPECT_DOUBLE_EQ(sw.rows.back().value, 0.50);
    for (const auto& r : sw.rows) EXPECT_EQ(r.mean, 1.0);
    EXPECT_DOUBLE_EQ(sw.best_value, 0.01);
    EXPECT_EQ(sw.best_reduct.gamma_trace, (std::vector<double>{1.0}));
}

TEST(DeltaSweep, Deterministic)
{
    std::mt19937_64 rng(61);
    auto ds = testing_support::random_continuous(rng, 50, 2, 2);
    EXPECT_EQ(render_csv(delta_sweep(ds, quick())), render_csv(delta_sweep(ds, quick())));
}

TEST(Compare, ZooOriginalNearPublishedAccuracy)
{
    auto ds = load_csv(std::string(GBRS_DATA_DIR) + "/zoo.csv");
    auto c = compare(ds, {Method::original}, quick());
    ASSERT_EQ(c.reports.size(), 1u);
    EXPECT_NEAR(c.reports[0].mean, 0.95, 0.05);
    EXPECT_EQ(c.reports[0].method, "Original");
}

TEST(Compare, TableIsByteIdenticalAndMarksWinner)
{
    auto ds = load_csv(std::string(GBRS_DATA_DIR) + "/zoo.csv");
    auto cfg = quick();
    cfg.lbs = 4;
    std::vector<Method> ms{Method::original, Method::prs, Method::gbnrs};
    auto a = render_text(compare(ds, ms, cfg));
    auto b = render_text(compare(ds, ms, cfg));
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find(" *"), std::string::npos);
    EXPECT_NE(a.find("Original"), std::string::npos);
    EXPECT_NE(a.find("PRS"), std::string::npos);
    EXPECT_NE(a.find("GBNRS"), std::string::npos);
}

TEST(Report, JsonOmitsWallClock)
{
    auto r = cross_validate(two_blobs(10, 3), AttributeSubset::all(3), 5, 1, 0);
    EXPECT_FALSE(to_json(r).contains("seconds"));
    EXPECT_EQ(mean_pm_std(0.95, 0.0353), "0.9500±0.0353");
}

TEST(Method, NamesRoundTrip)
{
    for (Method m : {Method::original, Method::prs, Method::nrs, Method::gbnrs, Method::gbprs, Method::gbrct})
        EXPECT_EQ(parse_method(method_name(m)), m);
    EXPECT_THROW(parse_method("bogus"), ContractViolation);
}
